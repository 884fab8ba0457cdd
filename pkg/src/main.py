from app.cmd.cmd import cli

if __name__ == "__main__":
    cli()
