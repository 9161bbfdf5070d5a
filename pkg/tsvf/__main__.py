import sys

from tsvf.cli import main

sys.exit(main())
