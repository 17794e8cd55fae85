import sys

from tautline.main import main

sys.exit(main())
