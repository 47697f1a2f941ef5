import sys

from greenrisk.cli import main

sys.exit(main())
