import sys

from spinrelax.cli import main

sys.exit(main())
