import sys

from hcsketch.cli import main


sys.exit(main())
