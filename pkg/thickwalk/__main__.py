from thickwalk.cli import main

raise SystemExit(main())
