import sys

from netalign.cli import main

sys.exit(main())
