import sys

from spvar.main import main

sys.exit(main())
