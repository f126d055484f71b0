"""Closed-form membership predicates for every catalog shape.

Used to cross-check the constructive voxel builders: a cell belongs to
the shape iff the predicate holds, evaluated by scanning the whole
bounding box. Origin conventions match make_shape (min corner for
box-like shapes, center for radial ones).
"""


def _d2(x, y, z):
    return x * x + y * y + z * z


def predicate_and_box(shape: str, p: dict):
    """Returns (predicate(x, y, z) -> bool, (xrange, yrange, zrange))."""
    if shape == "cube":
        s = p["size"]
        return (lambda x, y, z: 0 <= x < s and 0 <= y < s and 0 <= z < s), _box(s, s, s)
    if shape == "hollow_cube":
        s = p["size"]
        edge = (0, s - 1)
        return (
            lambda x, y, z: 0 <= x < s
            and 0 <= y < s
            and 0 <= z < s
            and (x in edge or y in edge or z in edge)
        ), _box(s, s, s)
    if shape in ("rectanguloid", "hole"):
        sx, sy, sz = p["size"]
        return (lambda x, y, z: 0 <= x < sx and 0 <= y < sy and 0 <= z < sz), _box(sx, sy, sz)
    if shape == "hollow_rectanguloid":
        sx, sy, sz = p["size"]
        return (
            lambda x, y, z: 0 <= x < sx
            and 0 <= y < sy
            and 0 <= z < sz
            and (x in (0, sx - 1) or y in (0, sy - 1) or z in (0, sz - 1))
        ), _box(sx, sy, sz)
    if shape == "rectanguloid_frame":
        sx, sy, sz = p["size"]

        def frame(x, y, z):
            if not (0 <= x < sx and 0 <= y < sy and 0 <= z < sz):
                return False
            on = (x in (0, sx - 1)) + (y in (0, sy - 1)) + (z in (0, sz - 1))
            return on >= 2

        return frame, _box(sx, sy, sz)
    if shape == "sphere":
        r = p["radius"]
        return (lambda x, y, z: _d2(x, y, z) <= r * r), _ball(r)
    if shape == "spherical_shell":
        r = p["radius"]
        return (
            lambda x, y, z: (r - 1) ** 2 < _d2(x, y, z) <= r * r
        ), _ball(r)
    if shape == "dome":
        r = p["radius"]
        return (
            lambda x, y, z: y >= 0 and (r - 1) ** 2 < _d2(x, y, z) <= r * r
        ), _ball(r)
    if shape == "ellipsoid":
        rx, ry, rz = p["radii"]
        return (
            lambda x, y, z: (x / rx) ** 2 + (y / ry) ** 2 + (z / rz) ** 2 <= 1.0
        ), (range(-rx, rx + 1), range(-ry, ry + 1), range(-rz, rz + 1))
    if shape == "pyramid":
        s = p["size"]
        return (
            lambda x, y, z: 0 <= y and s - 2 * y >= 1 and y <= x < s - y and y <= z < s - y
        ), _box(s, s, s)
    if shape == "square":
        s = p["size"]
        return (lambda x, y, z: y == 0 and 0 <= x < s and 0 <= z < s), _box(s, 1, s)
    if shape == "rectangle":
        sx, sz = p["size"]
        return (lambda x, y, z: y == 0 and 0 <= x < sx and 0 <= z < sz), _box(sx, 1, sz)
    if shape == "hollow_rectangle":
        sx, sz = p["size"]
        return (
            lambda x, y, z: y == 0
            and 0 <= x < sx
            and 0 <= z < sz
            and (x in (0, sx - 1) or z in (0, sz - 1))
        ), _box(sx, 1, sz)
    if shape == "circle":
        r = p["radius"]
        return (
            lambda x, y, z: y == 0 and (r - 1) ** 2 < x * x + z * z <= r * r
        ), _ball(r)
    if shape == "disk":
        r = p["radius"]
        return (lambda x, y, z: y == 0 and x * x + z * z <= r * r), _ball(r)
    if shape == "triangle":
        s = p["size"]
        return (lambda x, y, z: y == 0 and 0 <= z < s and 0 <= x <= z), _box(s, 1, s)
    if shape == "hollow_triangle":
        s = p["size"]
        return (
            lambda x, y, z: y == 0
            and 0 <= z < s
            and 0 <= x <= z
            and (x == 0 or x == z or z == s - 1)
        ), _box(s, 1, s)
    if shape == "arch":
        w, h = p["width"], p["height"]

        def arch(x, y, z):
            if z != 0:
                return False
            column = x in (0, w - 1) and 0 <= y < h
            lintel = y == h and 0 <= x < w
            return column or lintel

        return arch, (range(w), range(h + 1), range(1))
    raise AssertionError(f"no predicate for shape {shape!r}")


def _box(sx, sy, sz):
    return (range(sx), range(sy), range(sz))


def _ball(r):
    return (range(-r, r + 1), range(-r, r + 1), range(-r, r + 1))


def enumerate_shape(shape: str, params: dict) -> set:
    """Brute-force voxel set by scanning the bounding box with the predicate."""
    pred, (xs, ys, zs) = predicate_and_box(shape, params)
    return {(x, y, z) for x in xs for y in ys for z in zs if pred(x, y, z)}
