import sys

from minmove.cli import main

sys.exit(main())
