import sys

from tagforge.cli import main

sys.exit(main())
