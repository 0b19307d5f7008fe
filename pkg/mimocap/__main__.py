import sys

from mimocap._cli import main

sys.exit(main())
