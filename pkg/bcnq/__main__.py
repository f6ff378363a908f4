import sys

from bcnq.cli import main

sys.exit(main())
