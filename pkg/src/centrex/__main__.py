import sys

from centrex.cli import main

sys.exit(main())
