from lgc.cli import main

main()
