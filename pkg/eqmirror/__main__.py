import sys

from eqmirror.cli import main

sys.exit(main())
