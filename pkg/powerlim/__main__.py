from powerlim.main import main

main()
