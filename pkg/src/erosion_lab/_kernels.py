"""Compiled inner loops.

Every kernel that draws random numbers reseeds numba's generator from an
explicit ``seed`` argument first, so a kernel call is a pure function of its
inputs.  Callers derive those seeds from ``numpy.random.SeedSequence``.

Status codes: 0 ok, 1 walk cap exceeded.
"""
import numpy as np
from numba import njit

OK = 0
CAP_EXCEEDED = 1


@njit(cache=True)
def exit_walk(mask, want, nbr, v, cap):
    """Walk from `v` while ``mask[v] == want``; first other site, or -1 past `cap`."""
    steps = 0
    while mask[v] == want:
        v = nbr[v, np.random.randint(0, 4)]
        steps += 1
        if steps > cap:
            return -1
    return v


@njit(cache=True)
def reach(allowed, sources, nbr):
    """Sites reachable from ``sources & allowed`` through `allowed` sites."""
    N = allowed.shape[0]
    seen = np.zeros(N, dtype=np.bool_)
    stack = np.empty(N, dtype=np.int64)
    top = 0
    for v in range(N):
        if sources[v] and allowed[v]:
            seen[v] = True
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for j in range(4):
            w = nbr[v, j]
            if allowed[w] and not seen[w]:
                seen[w] = True
                stack[top] = w
                top += 1
    return seen


@njit(cache=True)
def _separated(blocker, n, nbr):
    # no path from bottom \ blocker to top \ blocker avoiding blocker
    N = blocker.shape[0]
    free = ~blocker
    bottom = np.zeros(N, dtype=np.bool_)
    bottom[:n] = True
    r = reach(free, bottom, nbr)
    for v in range(N - n, N):
        if r[v]:
            return False
    return True


@njit(cache=True)
def blue_over_red(blue, n, nbr):
    """Blue blocking set over a red blocking set, by monotone fixed point.

    Valid pairs (A red, B blue) satisfy A <= A_k and B <= B_k for the
    decreasing iterates below, so one exists iff the fixed point is valid.
    """
    N = blue.shape[0]
    red = ~blue
    bottom = np.zeros(N, dtype=np.bool_)
    bottom[:n] = True
    top = np.zeros(N, dtype=np.bool_)
    top[N - n:] = True
    A = red.copy()
    B = np.zeros(N, dtype=np.bool_)
    while True:
        # largest B kept from bottom \ A by A
        below = reach(~A, bottom, nbr)
        newB = blue & ~below
        # largest A kept from top \ B by B
        above = reach(~newB, top, nbr)
        newA = red & ~above
        if np.array_equal(newA, A) and np.array_equal(newB, B):
            break
        A = newA
        B = newB
    if not A.any() or not B.any():
        return False
    return _separated(A, n, nbr) and _separated(B, n, nbr)


@njit(cache=True)
def erosion_run(blue, row_blue, hnum, nbr, n, nsteps, seed, cap,
                h_out, rows_out, check_blocking, blocking_out):
    """Advance the chain `nsteps` full steps in place.

    `hnum` is the height numerator sum_{blue} (n - row), so h = hnum / n.
    Per-step records go to ``h_out[t]`` and ``rows_out[t]`` (may be empty).
    Returns ``(status, hnum, steps_done)``.
    """
    np.random.seed(seed)
    N = blue.shape[0]
    top0 = N - n
    record = h_out.shape[0] > 0
    for t in range(nsteps):
        x = exit_walk(blue, True, nbr, np.random.randint(0, n), cap)
        if x < 0:
            return CAP_EXCEEDED, hnum, t
        blue[x] = True
        row_blue[x // n] += 1
        hnum += n - x // n
        y = exit_walk(blue, False, nbr, top0 + np.random.randint(0, n), cap)
        if y < 0:
            return CAP_EXCEEDED, hnum, t
        blue[y] = False
        row_blue[y // n] -= 1
        hnum -= n - y // n
        if record:
            h_out[t] = hnum
            rows_out[t, :] = row_blue
        if check_blocking:
            blocking_out[t] = blue_over_red(blue, n, nbr)
    return OK, hnum, nsteps


@njit(cache=True)
def one_step_increments(blue, nbr, n, samples, seed, cap, out):
    """i.i.d. one-step height-numerator increments from a fixed state."""
    np.random.seed(seed)
    N = blue.shape[0]
    top0 = N - n
    for s in range(samples):
        x = exit_walk(blue, True, nbr, np.random.randint(0, n), cap)
        if x < 0:
            return CAP_EXCEEDED
        blue[x] = True
        y = exit_walk(blue, False, nbr, top0 + np.random.randint(0, n), cap)
        if y < 0:
            blue[x] = False
            return CAP_EXCEEDED
        blue[y] = False
        out[s] = (n - x // n) - (n - y // n)
        blue[y] = True
        blue[x] = False
    return OK


@njit(cache=True)
def idla_run(grid, n, particles, seed, kill_row, cap, placed_out):
    """IDLA on C_n x Z>=0 with the reflected walk (row 0 -> row 1 w.p. 1/2).

    `grid` is ``(rows, n)`` and must have at least max occupied row + 2 rows.
    A walker arriving at a row >= `kill_row` (when ``kill_row >= 0``) is
    discarded.  ``placed_out[i]`` is the flat settle site or -1 if killed.
    """
    np.random.seed(seed)
    for i in range(particles):
        c = np.random.randint(0, n)
        r = 0
        steps = 0
        while True:
            if kill_row >= 0 and r >= kill_row:
                placed_out[i] = -1
                break
            if not grid[r, c]:
                grid[r, c] = True
                placed_out[i] = r * n + c
                break
            d = np.random.randint(0, 4)
            if d == 0:
                c = (c - 1) % n
            elif d == 1:
                c = (c + 1) % n
            elif d == 2:
                r = r - 1 if r > 0 else 1
            else:
                r += 1
            steps += 1
            if steps > cap:
                return CAP_EXCEEDED
    return OK


@njit(cache=True)
def shared_walk(inside, nbr, n, from_top, seed, kill_row, cap):
    """One walker on Cyl_n driven by a stream fixed by `seed`.

    Processes coupled by a common seed consume identical draws: the start
    column first, then one direction per step.  Returns the first site
    outside `inside`, -2 if killed (row >= kill_row from the bottom, row <=
    kill_row from the top; ``kill_row < 0`` disables), -3 if `inside` is the
    whole graph, -1 past `cap`.
    """
    N = inside.shape[0]
    if inside.all():
        return -3
    np.random.seed(seed)
    c = np.random.randint(0, n)
    v = N - n + c if from_top else c
    steps = 0
    while True:
        if kill_row >= 0:
            r = v // n
            if (not from_top and r >= kill_row) or (from_top and r <= kill_row):
                return -2
        if not inside[v]:
            return v
        v = nbr[v, np.random.randint(0, 4)]
        steps += 1
        if steps > cap:
            return -1


@njit(cache=True)
def _sort_half(lab, nbr, start, carried, stop_label, ascending, cap):
    # walker swaps when the vertex label beats its carried label
    v = start
    steps = 0
    while True:
        lv = lab[v]
        if (ascending and lv > carried) or (not ascending and lv < carried):
            lab[v] = carried
            carried = lv
        if carried == stop_label:
            return OK
        v = nbr[v, np.random.randint(0, 4)]
        steps += 1
        if steps > cap:
            return CAP_EXCEEDED


@njit(cache=True)
def sorting_run(lab, nbr, n, nsteps, seed, cap, check, dev_every, dev_out):
    """Diffusive sorting steps in place.

    With `check`, verifies bijectivity after each half step and the level-set
    nesting ``lab_half <= lab_prev + 1`` and ``lab_half <= lab_next + 1``
    pointwise.  Returns ``(status, ok, steps_done)``.
    """
    np.random.seed(seed)
    N = lab.shape[0]
    prev = lab.copy()
    seen = np.zeros(N + 2, dtype=np.bool_)
    ok = True
    k = 0
    for t in range(nsteps):
        if check:
            prev[:] = lab
        if _sort_half(lab, nbr, np.random.randint(0, n), 0, N, True, cap) != OK:
            return CAP_EXCEEDED, ok, t
        lab += 1
        if check:
            seen[:] = False
            for v in range(N):
                lv = lab[v]
                if lv < 1 or lv > N or seen[lv]:
                    ok = False
                else:
                    seen[lv] = True
                if lv > prev[v] + 1:
                    ok = False
            prev[:] = lab
        if _sort_half(lab, nbr, N - n + np.random.randint(0, n), N + 1, 1,
                      False, cap) != OK:
            return CAP_EXCEEDED, ok, t
        lab -= 1
        if check:
            seen[:] = False
            for v in range(N):
                lv = lab[v]
                if lv < 1 or lv > N or seen[lv]:
                    ok = False
                else:
                    seen[lv] = True
                if prev[v] > lv + 1:
                    ok = False
        if dev_every > 0 and (t + 1) % dev_every == 0 and k < dev_out.shape[0]:
            worst = 0.0
            for v in range(N):
                d = abs(lab[v] / (n * n) - (v // n) / n)
                if d > worst:
                    worst = d
            dev_out[k] = worst
            k += 1
    return OK, ok, nsteps
