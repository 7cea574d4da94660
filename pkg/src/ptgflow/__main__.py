import sys

from ptgflow.cli import main

sys.exit(main())
