"""Compiled inner loops.

Everything here works in internal units: millimetres, radians,
counter-clockwise-positive angles.  A world is passed as four arrays:

    bounds  (n, 4)    x_min, x_max, y_min, y_max per tile
    normal  (n + 1,)  groove-normal direction per tile, background last
    pitch   (n + 1,)
    corner  (n + 1, 2) reference corner of the ridge family

``locate`` returns ``n`` for the background.

The heading is carried explicitly and advanced by the turn measured in
the body frame.  At the groove-normal fixed point the lateral chord
component is exactly zero, so the heading stops moving instead of
drifting on position round-off.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

OK = -1


@njit(cache=True)
def locate(bounds, x, y):
    for i in range(bounds.shape[0] - 1, -1, -1):
        if bounds[i, 0] <= x <= bounds[i, 1] and bounds[i, 2] <= y <= bounds[i, 3]:
            return i
    return bounds.shape[0]


@njit(cache=True)
def wrap(a, half):
    full = 2.0 * half
    while a > half:
        a -= full
    while a <= -half:
        a += full
    return a


@njit(cache=True)
def fold_axis(d, half):
    """Wrap ``d`` to (-half, half] then fold onto the axis range (-half/2, half/2]."""
    d = wrap(d, half)
    quarter = 0.5 * half
    if d > quarter:
        d -= half
    elif d <= -quarter:
        d += half
    return d


@njit(cache=True)
def snap_offset(px, py, cx, cy, theta, pitch):
    nx = math.cos(theta)
    ny = math.sin(theta)
    s = (px - cx) * nx + (py - cy) * ny
    # ties (s exactly half way) go to the lower index
    k = math.ceil(s / pitch - 0.5)
    d = k * pitch - s
    return d * nx, d * ny


@njit(cache=True)
def extend(rx, ry, fx, fy, psi, bounds, normal, pitch, corner,
           l_min, l_max, k_front, k_rear, beta, snap):
    stroke = l_max - l_min
    tf = locate(bounds, fx, fy)
    tr = locate(bounds, rx, ry)
    a_f = k_front * fold_axis(normal[tf] - psi, math.pi)
    a_r = k_rear * fold_axis(normal[tr] - psi, math.pi)
    s_f = beta * stroke
    s_r = (1.0 - beta) * stroke

    fx2 = fx + s_f * math.cos(psi + a_f)
    fy2 = fy + s_f * math.sin(psi + a_f)
    # chord rear' -> front' in the body frame of the incoming state
    bx = l_min + s_f * math.cos(a_f) + s_r * math.cos(a_r)
    by = s_f * math.sin(a_f) + s_r * math.sin(a_r)

    if snap:
        t = locate(bounds, fx2, fy2)
        dx, dy = snap_offset(fx2, fy2, corner[t, 0], corner[t, 1], normal[t], pitch[t])
        fx2 += dx
        fy2 += dy
        c = math.cos(psi)
        s = math.sin(psi)
        bx += c * dx + s * dy
        by += -s * dx + c * dy

    if bx == 0.0 and by == 0.0:
        return rx, ry, fx, fy, psi, False
    psi2 = wrap(psi + math.atan2(by, bx), math.pi)
    rx2 = fx2 - l_max * math.cos(psi2)
    ry2 = fy2 - l_max * math.sin(psi2)
    return rx2, ry2, fx2, fy2, psi2, True


@njit(cache=True)
def contract(rx, ry, fx, fy, psi, bounds, normal,
             l_min, l_max, k_rear):
    stroke = l_max - l_min
    tr = locate(bounds, rx, ry)
    a_r = k_rear * fold_axis(normal[tr] - psi, math.pi)
    bx = l_max - stroke * math.cos(a_r)
    by = -stroke * math.sin(a_r)
    if bx == 0.0 and by == 0.0:
        return rx, ry, fx, fy, psi, False
    psi2 = wrap(psi + math.atan2(by, bx), math.pi)
    rx2 = fx - l_min * math.cos(psi2)
    ry2 = fy - l_min * math.sin(psi2)
    return rx2, ry2, fx, fy, psi2, True


@njit(cache=True)
def simulate(rx, ry, fx, fy, psi, max_cycles, stop_x,
             bounds, normal, pitch, corner,
             l_min, l_max, k_front, k_rear, beta, snap):
    """Run full cycles from a contracted state.

    Stops after ``max_cycles`` or after the first full cycle that leaves
    the front foot at ``x >= stop_x``.  Returns the filled sample count and
    the failing cycle index (``OK`` when none failed).
    """
    n = 2 * max_cycles + 1
    rear = np.empty((n, 2))
    front = np.empty((n, 2))
    heading = np.empty(n)
    tile_f = np.empty(n, dtype=np.int64)
    tile_r = np.empty(n, dtype=np.int64)

    rear[0, 0] = rx
    rear[0, 1] = ry
    front[0, 0] = fx
    front[0, 1] = fy
    heading[0] = psi
    tile_f[0] = locate(bounds, fx, fy)
    tile_r[0] = locate(bounds, rx, ry)
    count = 1
    status = OK
    for c in range(max_cycles):
        rx, ry, fx, fy, psi, ok = extend(rx, ry, fx, fy, psi, bounds, normal, pitch, corner,
                                         l_min, l_max, k_front, k_rear, beta, snap)
        if not ok:
            status = c
            break
        rear[count, 0] = rx
        rear[count, 1] = ry
        front[count, 0] = fx
        front[count, 1] = fy
        heading[count] = psi
        tile_f[count] = locate(bounds, fx, fy)
        tile_r[count] = locate(bounds, rx, ry)
        count += 1

        rx, ry, fx, fy, psi, ok = contract(rx, ry, fx, fy, psi, bounds, normal,
                                           l_min, l_max, k_rear)
        if not ok:
            status = c
            break
        rear[count, 0] = rx
        rear[count, 1] = ry
        front[count, 0] = fx
        front[count, 1] = fy
        heading[count] = psi
        tile_f[count] = locate(bounds, fx, fy)
        tile_r[count] = locate(bounds, rx, ry)
        count += 1
        if fx >= stop_x:
            break
    return rear[:count], front[:count], heading[:count], tile_f[:count], tile_r[:count], status
