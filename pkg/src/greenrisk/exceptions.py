class GreenRiskError(ValueError):
    """Raised for invalid user input: bad files, violated preconditions, unusable data.

    The CLI maps this to exit code 2; anything else escaping a command is exit 3.
    """
