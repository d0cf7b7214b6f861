import sys

from chanpred.cli import main

sys.exit(main())
