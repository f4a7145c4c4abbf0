import sys

from holab.cli import main

sys.exit(main())
