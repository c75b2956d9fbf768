import sys

from fastron_fk.bench.cli import main

sys.exit(main())
