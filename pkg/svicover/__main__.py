import sys

from svicover.pipeline.cli import main


sys.exit(main())
