import subprocess
import sys


def search_logs(pattern):
    cmd = "grep " + pattern + " /var/log/app.log"
    out = subprocess.check_output(cmd, shell=True)
    return out.decode()


if __name__ == "__main__":
    print(search_logs(sys.argv[1]))
