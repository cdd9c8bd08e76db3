from anonhist.main import main

main()
