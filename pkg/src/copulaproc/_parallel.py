from concurrent.futures import ThreadPoolExecutor


def replicate(fn, reps, threads=1):
    """``[fn(r) for r in range(reps)]``, optionally on a thread pool.

    Results come back in replication order, so any reduction over them is
    independent of the thread count.
    """
    threads = max(1, int(threads or 1))
    if threads == 1 or reps <= 1:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))
