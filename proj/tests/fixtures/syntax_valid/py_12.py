def describe(value):
    match value:
        case {"type": "point", "x": x, "y": y}:
            return f"point({x}, {y})"
        case [first, *rest]:
            return f"list starting with {first!r} and {len(rest)} more"
        case _:
            return "unknown"
