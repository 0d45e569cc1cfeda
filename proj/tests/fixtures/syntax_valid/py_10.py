def gen_squares(limit):
    n = 0
    while n * n < limit:
        yield n * n
        n += 1
