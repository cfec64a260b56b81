import sys

from freqpix.cli import main

sys.exit(main())
