import sys

from bacsum.cli import main

sys.exit(main())
