import sys

from teerkit.cli import main

sys.exit(main())
