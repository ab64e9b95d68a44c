from trustdyn.cli import main

main()
