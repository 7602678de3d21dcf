from kreisslab.cli import main

main()
