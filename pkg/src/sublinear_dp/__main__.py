import sys

from sublinear_dp.cli import main

sys.exit(main())
