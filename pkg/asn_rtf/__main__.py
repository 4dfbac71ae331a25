import sys

from asn_rtf.main import main

sys.exit(main())
