from .modelio.cli import main

main()
