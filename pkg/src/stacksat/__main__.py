import sys

from stacksat.cli import main

sys.exit(main())
