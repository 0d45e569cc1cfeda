import re

EMAIL = re.compile(r"^[\w.+-]+@[\w-]+\.[\w.]+$")


def is_email(s: str) -> bool:
    return bool(EMAIL.match(s))
