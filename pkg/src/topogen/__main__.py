from topogen.cli import main

raise SystemExit(main())
