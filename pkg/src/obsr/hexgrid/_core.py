"""Pure-Python index math for the H3 hierarchical hexagonal grid standard.

Implements the standard's published cell-indexing algorithms (icosahedral
gnomonic projection, aperture-7 hierarchy, base-cell lookup, neighbor
traversal, local IJK coordinates) so the package has no binary dependency.
Indexes produced here are bit-compatible with the standard; conformance is
pinned by the test suite against published reference values.

Internal module: operates on raw 64-bit ints and (i, j, k) tuples. The
public wrapper types live in ``obsr.hexgrid``.
"""

from __future__ import annotations

import math

from obsr.hexgrid import _tables as T
from obsr.hexgrid.errors import (
    DistanceUndefined,
    InvalidCell,
    PentagonEncountered,
)

# --- constants -------------------------------------------------------------

M_2PI = 2.0 * math.pi
EPSILON = 1.0e-16
M_SQRT3_2 = math.sqrt(3.0) / 2.0
M_SIN60 = M_SQRT3_2
M_SQRT7 = math.sqrt(7.0)
# rotation angle between class II and class III resolution axes
M_AP7_ROT_RADS = math.asin(math.sqrt(3.0 / 28.0))
# scale from res-0 unit length to gnomonic unit length
RES0_U_GNOMONIC = 0.38196601125010500003

MAX_RES = 15
NUM_BASE_CELLS = 122
NUM_ICOSA_FACES = 20
INVALID_BASE_CELL = 127
MAX_FACE_COORD = 2

# axial digits
CENTER_DIGIT = 0
K_AXES_DIGIT = 1
J_AXES_DIGIT = 2
JK_AXES_DIGIT = 3
I_AXES_DIGIT = 4
IK_AXES_DIGIT = 5
IJ_AXES_DIGIT = 6
INVALID_DIGIT = 7

UNIT_VECS = (
    (0, 0, 0),
    (0, 0, 1),
    (0, 1, 0),
    (0, 1, 1),
    (1, 0, 0),
    (1, 0, 1),
    (1, 1, 0),
)

# faceNeighbors quadrants
IJ_QUADRANT = 1
KI_QUADRANT = 2
JK_QUADRANT = 3

# overage codes
NO_OVERAGE = 0
FACE_EDGE = 1
NEW_FACE = 2

# maximum unit-IJK dimension / unit scale per class-II resolution
MAX_DIM_BY_CII_RES = (2, -1, 14, -1, 98, -1, 686, -1, 4802, -1, 33614, -1,
                      235298, -1, 1647086, -1, 11529602)
UNIT_SCALE_BY_CII_RES = (1, -1, 7, -1, 49, -1, 343, -1, 2401, -1, 16807, -1,
                         117649, -1, 823543, -1, 5764801)

# bit layout
_MODE_OFFSET = 59
_BC_OFFSET = 45
_RES_OFFSET = 52
_RESERVED_OFFSET = 56
_PER_DIGIT = 3
_DIGIT_MASK = 7
CELL_MODE = 1
# mode 0, res 0, base cell 0, every digit 7
H3_INIT = 35184372088831
_U64 = (1 << 64) - 1


def is_class_iii(res: int) -> bool:
    return res % 2 == 1


# --- bit-level accessors ---------------------------------------------------

def get_mode(h: int) -> int:
    return (h >> _MODE_OFFSET) & 15


def get_resolution(h: int) -> int:
    return (h >> _RES_OFFSET) & 15


def set_resolution(h: int, res: int) -> int:
    return (h & ~(15 << _RES_OFFSET)) | (res << _RES_OFFSET)


def get_base_cell(h: int) -> int:
    return (h >> _BC_OFFSET) & 127


def set_base_cell(h: int, bc: int) -> int:
    return (h & ~(127 << _BC_OFFSET)) | (bc << _BC_OFFSET)


def get_index_digit(h: int, res: int) -> int:
    return (h >> ((MAX_RES - res) * _PER_DIGIT)) & _DIGIT_MASK


def set_index_digit(h: int, res: int, digit: int) -> int:
    shift = (MAX_RES - res) * _PER_DIGIT
    return (h & ~(_DIGIT_MASK << shift)) | (digit << shift)


def is_valid_cell(h: int) -> bool:
    if not 0 <= h <= _U64:
        return False
    if h >> 63:
        return False
    if get_mode(h) != CELL_MODE:
        return False
    if (h >> _RESERVED_OFFSET) & 7:
        return False
    base_cell = get_base_cell(h)
    if base_cell >= NUM_BASE_CELLS:
        return False
    res = get_resolution(h)
    found_nonzero = False
    for r in range(1, res + 1):
        digit = get_index_digit(h, r)
        if not found_nonzero and digit != CENTER_DIGIT:
            found_nonzero = True
            if _is_base_cell_pentagon(base_cell) and digit == K_AXES_DIGIT:
                return False
        if digit >= INVALID_DIGIT:
            return False
    for r in range(res + 1, MAX_RES + 1):
        if get_index_digit(h, r) != INVALID_DIGIT:
            return False
    return True


def h3_to_string(h: int) -> str:
    return format(h, "x")


def string_to_h3(s: str) -> int:
    try:
        h = int(s, 16)
    except ValueError:
        raise InvalidCell(f"not a hexadecimal cell index: {s!r}") from None
    if not 0 <= h <= _U64:
        raise InvalidCell(f"cell index out of 64-bit range: {s!r}")
    return h


def cell_to_parent(h: int, parent_res: int) -> int:
    child_res = get_resolution(h)
    if not 0 <= parent_res <= child_res:
        raise InvalidCell(
            f"parent resolution {parent_res} not in [0, {child_res}]")
    if parent_res == child_res:
        return h
    parent = set_resolution(h, parent_res)
    for r in range(parent_res + 1, child_res + 1):
        parent = set_index_digit(parent, r, _DIGIT_MASK)
    return parent


def _is_base_cell_pentagon(bc: int) -> bool:
    return T.BASE_CELL_DATA[bc][2] == 1


def _is_base_cell_polar_pentagon(bc: int) -> bool:
    return bc == 4 or bc == 117


def is_pentagon(h: int) -> bool:
    return (_is_base_cell_pentagon(get_base_cell(h))
            and _leading_nonzero_digit(h) == CENTER_DIGIT)


def _leading_nonzero_digit(h: int) -> int:
    for r in range(1, get_resolution(h) + 1):
        digit = get_index_digit(h, r)
        if digit:
            return digit
    return CENTER_DIGIT


def get_pentagons(res: int):
    """The 12 pentagon cells at a resolution."""
    out = []
    for bc in range(NUM_BASE_CELLS):
        if _is_base_cell_pentagon(bc):
            h = set_resolution(H3_INIT | (CELL_MODE << _MODE_OFFSET), res)
            h = set_base_cell(h, bc)
            for r in range(1, res + 1):
                h = set_index_digit(h, r, CENTER_DIGIT)
            out.append(h)
    return out


# --- digit / index rotations ----------------------------------------------

_ROT60CCW = (0, 5, 3, 1, 6, 4, 2, 7)  # K->IK, J->JK, JK->K, I->IJ, IK->I, IJ->J
_ROT60CW = (0, 3, 6, 2, 5, 1, 4, 7)   # K->JK, J->IJ, JK->J, I->IK, IK->K, IJ->I


def _rotate60ccw(digit: int) -> int:
    return _ROT60CCW[digit]


def _rotate60cw(digit: int) -> int:
    return _ROT60CW[digit]


def _h3_rotate60ccw(h: int) -> int:
    for r in range(1, get_resolution(h) + 1):
        h = set_index_digit(h, r, _ROT60CCW[get_index_digit(h, r)])
    return h


def _h3_rotate60cw(h: int) -> int:
    for r in range(1, get_resolution(h) + 1):
        h = set_index_digit(h, r, _ROT60CW[get_index_digit(h, r)])
    return h


def _h3_rotate_pent60ccw(h: int) -> int:
    found_first = False
    for r in range(1, get_resolution(h) + 1):
        h = set_index_digit(h, r, _ROT60CCW[get_index_digit(h, r)])
        if not found_first and get_index_digit(h, r) != 0:
            found_first = True
            if _leading_nonzero_digit(h) == K_AXES_DIGIT:
                h = _h3_rotate60ccw(h)
    return h


def _h3_rotate_pent60cw(h: int) -> int:
    found_first = False
    for r in range(1, get_resolution(h) + 1):
        h = set_index_digit(h, r, _ROT60CW[get_index_digit(h, r)])
        if not found_first and get_index_digit(h, r) != 0:
            found_first = True
            if _leading_nonzero_digit(h) == K_AXES_DIGIT:
                h = _h3_rotate60cw(h)
    return h


# --- IJK coordinate arithmetic ----------------------------------------------

def _ijk_normalize(i: int, j: int, k: int):
    if i < 0:
        j -= i
        k -= i
        i = 0
    if j < 0:
        i -= j
        k -= j
        j = 0
    if k < 0:
        i -= k
        j -= k
        k = 0
    m = i if i < j else j
    if k < m:
        m = k
    if m > 0:
        i -= m
        j -= m
        k -= m
    return i, j, k


def _unit_ijk_to_digit(i: int, j: int, k: int) -> int:
    c = _ijk_normalize(i, j, k)
    try:
        return UNIT_VECS.index(c)
    except ValueError:
        return INVALID_DIGIT


def _round_half_away(x: float) -> int:
    # C round()/lround(): ties away from zero (python round() ties to even)
    return math.floor(x + 0.5) if x >= 0.0 else math.ceil(x - 0.5)


def _up_ap7(i: int, j: int, k: int):
    ci = i - k
    cj = j - k
    return _ijk_normalize(
        _round_half_away((3 * ci - cj) / 7.0),
        _round_half_away((ci + 2 * cj) / 7.0), 0)


def _up_ap7r(i: int, j: int, k: int):
    ci = i - k
    cj = j - k
    return _ijk_normalize(
        _round_half_away((2 * ci + cj) / 7.0),
        _round_half_away((3 * cj - ci) / 7.0), 0)


def _down_ap7(i: int, j: int, k: int):
    return _ijk_normalize(3 * i + j, 3 * j + k, i + 3 * k)


def _down_ap7r(i: int, j: int, k: int):
    return _ijk_normalize(3 * i + k, i + 3 * j, j + 3 * k)


def _down_ap3(i: int, j: int, k: int):
    return _ijk_normalize(2 * i + j, 2 * j + k, i + 2 * k)


def _down_ap3r(i: int, j: int, k: int):
    return _ijk_normalize(2 * i + k, i + 2 * j, j + 2 * k)


def _ijk_neighbor(i: int, j: int, k: int, digit: int):
    if CENTER_DIGIT < digit < INVALID_DIGIT:
        u = UNIT_VECS[digit]
        return _ijk_normalize(i + u[0], j + u[1], k + u[2])
    return i, j, k


def _ijk_rotate60ccw(i: int, j: int, k: int):
    return _ijk_normalize(i + k, i + j, j + k)


def _ijk_rotate60cw(i: int, j: int, k: int):
    return _ijk_normalize(i + j, j + k, i + k)


def _ijk_distance(a, b) -> int:
    di, dj, dk = _ijk_normalize(a[0] - b[0], a[1] - b[1], a[2] - b[2])
    return max(abs(di), abs(dj), abs(dk))


def _hex2d_to_coord_ijk(x: float, y: float):
    """Containing-hex IJK+ coordinates for a 2D cartesian point."""
    a1 = abs(x)
    a2 = abs(y)

    x2 = a2 / M_SIN60
    x1 = a1 + x2 / 2.0

    m1 = int(x1)
    m2 = int(x2)

    r1 = x1 - m1
    r2 = x2 - m2

    if r1 < 0.5:
        if r1 < 1.0 / 3.0:
            i = m1
            j = m2 if r2 < (1.0 + r1) / 2.0 else m2 + 1
        else:
            j = m2 if r2 < (1.0 - r1) else m2 + 1
            i = m1 + 1 if (1.0 - r1) <= r2 < (2.0 * r1) else m1
    else:
        if r1 < 2.0 / 3.0:
            j = m2 if r2 < (1.0 - r1) else m2 + 1
            i = m1 if (2.0 * r1 - 1.0) < r2 < (1.0 - r1) else m1 + 1
        else:
            i = m1 + 1
            j = m2 if r2 < (r1 / 2.0) else m2 + 1

    # fold across the axes if necessary
    if x < 0.0:
        if j % 2 == 0:
            axisi = j // 2
            i = i - 2 * (i - axisi)
        else:
            axisi = (j + 1) // 2
            i = i - (2 * (i - axisi) + 1)
    if y < 0.0:
        i = i - (2 * j + 1) // 2
        j = -j

    return _ijk_normalize(i, j, 0)


def _ijk_to_hex2d(i: int, j: int, k: int):
    ci = i - k
    cj = j - k
    return ci - 0.5 * cj, cj * M_SQRT3_2


# --- spherical geometry ------------------------------------------------------

def _pos_angle_rads(rads: float) -> float:
    tmp = rads + M_2PI if rads < 0.0 else rads
    if rads >= M_2PI:
        tmp -= M_2PI
    return tmp


def _constrain_lng(lng: float) -> float:
    while lng > math.pi:
        lng -= 2 * math.pi
    while lng < -math.pi:
        lng += 2 * math.pi
    return lng


def _geo_azimuth_rads(lat1: float, lng1: float, lat2: float, lng2: float) -> float:
    return math.atan2(
        math.cos(lat2) * math.sin(lng2 - lng1),
        math.cos(lat1) * math.sin(lat2)
        - math.sin(lat1) * math.cos(lat2) * math.cos(lng2 - lng1))


def _geo_az_distance_rads(lat: float, lng: float, az: float, distance: float):
    """Point at a given azimuth and angular distance from (lat, lng)."""
    if distance < EPSILON:
        return lat, lng

    az = _pos_angle_rads(az)

    if az < EPSILON or abs(az - math.pi) < EPSILON:  # due north/south
        lat2 = lat + distance if az < EPSILON else lat - distance
        if abs(lat2 - math.pi / 2) < EPSILON:
            return math.pi / 2, 0.0
        if abs(lat2 + math.pi / 2) < EPSILON:
            return -math.pi / 2, 0.0
        return lat2, _constrain_lng(lng)

    sinlat = math.sin(lat) * math.cos(distance) + \
        math.cos(lat) * math.sin(distance) * math.cos(az)
    sinlat = min(1.0, max(-1.0, sinlat))
    lat2 = math.asin(sinlat)
    if abs(lat2 - math.pi / 2) < EPSILON:
        return math.pi / 2, 0.0
    if abs(lat2 + math.pi / 2) < EPSILON:
        return -math.pi / 2, 0.0
    sinlng = math.sin(az) * math.sin(distance) / math.cos(lat2)
    coslng = (math.cos(distance) - math.sin(lat) * math.sin(lat2)) \
        / math.cos(lat) / math.cos(lat2)
    sinlng = min(1.0, max(-1.0, sinlng))
    coslng = min(1.0, max(-1.0, coslng))
    return lat2, _constrain_lng(lng + math.atan2(sinlng, coslng))


def _geo_to_closest_face(lat: float, lng: float):
    """Icosahedron face whose center is nearest, plus squared chord distance."""
    r = math.cos(lat)
    z = math.sin(lat)
    x = math.cos(lng) * r
    y = math.sin(lng) * r
    face = 0
    sqd = 5.0
    for f in range(NUM_ICOSA_FACES):
        cx, cy, cz = T.FACE_CENTER_POINT[f]
        d = (cx - x) ** 2 + (cy - y) ** 2 + (cz - z) ** 2
        if d < sqd:
            face = f
            sqd = d
    return face, sqd


# --- face IJK <-> geo ---------------------------------------------------------

def _geo_to_hex2d(lat: float, lng: float, res: int):
    face, sqd = _geo_to_closest_face(lat, lng)
    r = math.acos(1.0 - sqd / 2.0)

    if r < EPSILON:
        return face, 0.0, 0.0

    fc_lat, fc_lng = T.FACE_CENTER_GEO[face]
    az = _pos_angle_rads(_geo_azimuth_rads(fc_lat, fc_lng, lat, lng))
    theta = _pos_angle_rads(T.FACE_AXES_AZ_RADS_CII[face][0] - az)
    if is_class_iii(res):
        theta = _pos_angle_rads(theta - M_AP7_ROT_RADS)

    r = math.tan(r) / RES0_U_GNOMONIC
    for _ in range(res):
        r *= M_SQRT7

    return face, r * math.cos(theta), r * math.sin(theta)


def _geo_to_face_ijk(lat: float, lng: float, res: int):
    face, x, y = _geo_to_hex2d(lat, lng, res)
    i, j, k = _hex2d_to_coord_ijk(x, y)
    return face, i, j, k


def _hex2d_to_geo(x: float, y: float, face: int, res: int, substrate: bool):
    r = math.hypot(x, y)
    if r < EPSILON:
        return T.FACE_CENTER_GEO[face]

    theta = math.atan2(y, x)
    for _ in range(res):
        r /= M_SQRT7
    if substrate:
        r /= 3.0
        if is_class_iii(res):
            r /= M_SQRT7
    r = math.atan(r * RES0_U_GNOMONIC)

    if not substrate and is_class_iii(res):
        theta = _pos_angle_rads(theta + M_AP7_ROT_RADS)
    theta = _pos_angle_rads(T.FACE_AXES_AZ_RADS_CII[face][0] - theta)

    fc_lat, fc_lng = T.FACE_CENTER_GEO[face]
    return _geo_az_distance_rads(fc_lat, fc_lng, theta, r)


def _face_ijk_to_geo(face: int, i: int, j: int, k: int, res: int):
    x, y = _ijk_to_hex2d(i, j, k)
    return _hex2d_to_geo(x, y, face, res, False)


def _adjust_overage_class_ii(fijk, res: int, pent_leading_4: bool,
                             substrate: bool) -> int:
    """Normalize a face IJK address that may overflow onto a neighbor face.

    ``fijk`` is a mutable 4-list [face, i, j, k], adjusted in place.
    """
    overage = NO_OVERAGE
    face, i, j, k = fijk

    max_dim = MAX_DIM_BY_CII_RES[res]
    if substrate:
        max_dim *= 3

    if substrate and i + j + k == max_dim:
        overage = FACE_EDGE
    elif i + j + k > max_dim:
        overage = NEW_FACE
        if k > 0:
            if j > 0:
                orient = T.FACE_NEIGHBORS[face][JK_QUADRANT]
            else:
                orient = T.FACE_NEIGHBORS[face][KI_QUADRANT]
                if pent_leading_4:
                    # translate origin to pentagon center, rotate cw, translate back
                    oi, oj, ok = max_dim, 0, 0
                    ti, tj, tk = _ijk_rotate60cw(i - oi, j - oj, k - ok)
                    i, j, k = ti + oi, tj + oj, tk + ok
        else:
            orient = T.FACE_NEIGHBORS[face][IJ_QUADRANT]

        face = orient[0]
        for _ in range(orient[2]):
            i, j, k = _ijk_rotate60ccw(i, j, k)

        unit_scale = UNIT_SCALE_BY_CII_RES[res]
        if substrate:
            unit_scale *= 3
        ti, tj, tk = orient[1]
        i, j, k = _ijk_normalize(i + ti * unit_scale, j + tj * unit_scale,
                                 k + tk * unit_scale)
        if substrate and i + j + k == max_dim:
            overage = FACE_EDGE

    fijk[0] = face
    fijk[1] = i
    fijk[2] = j
    fijk[3] = k
    return overage


# --- index <-> face IJK --------------------------------------------------------

def _face_ijk_to_h3(face: int, i: int, j: int, k: int, res: int) -> int:
    h = H3_INIT
    h = (h & ~(15 << _MODE_OFFSET)) | (CELL_MODE << _MODE_OFFSET)
    h = set_resolution(h, res)

    if res == 0:
        if i > MAX_FACE_COORD or j > MAX_FACE_COORD or k > MAX_FACE_COORD:
            return 0
        return set_base_cell(h, T.FACE_IJK_BASE_CELLS[face][i][j][k][0])

    # build digits from finest res up
    for r in range(res - 1, -1, -1):
        li, lj, lk = i, j, k
        if is_class_iii(r + 1):
            i, j, k = _up_ap7(i, j, k)
            ci, cj, ck = _down_ap7(i, j, k)
        else:
            i, j, k = _up_ap7r(i, j, k)
            ci, cj, ck = _down_ap7r(i, j, k)
        h = set_index_digit(
            h, r + 1, _unit_ijk_to_digit(li - ci, lj - cj, lk - ck))

    if i > MAX_FACE_COORD or j > MAX_FACE_COORD or k > MAX_FACE_COORD:
        return 0

    base_cell, num_rots = T.FACE_IJK_BASE_CELLS[face][i][j][k]
    h = set_base_cell(h, base_cell)

    if _is_base_cell_pentagon(base_cell):
        if _leading_nonzero_digit(h) == K_AXES_DIGIT:
            if _base_cell_is_cw_offset(base_cell, face):
                h = _h3_rotate60cw(h)
            else:
                h = _h3_rotate60ccw(h)
        for _ in range(num_rots):
            h = _h3_rotate_pent60ccw(h)
    else:
        for _ in range(num_rots):
            h = _h3_rotate60ccw(h)

    return h


def _base_cell_is_cw_offset(bc: int, test_face: int) -> bool:
    cw = T.BASE_CELL_DATA[bc][3]
    return cw[0] == test_face or cw[1] == test_face


def _h3_to_face_ijk_with_initialized_fijk(h: int, fijk) -> bool:
    """Walk the digit path down from the base cell home coordinates.

    Returns True if overage onto a neighboring face is possible.
    """
    res = get_resolution(h)
    possible_overage = True
    if not _is_base_cell_pentagon(get_base_cell(h)) and (
            res == 0 or (fijk[1] == 0 and fijk[2] == 0 and fijk[3] == 0)):
        possible_overage = False

    i, j, k = fijk[1], fijk[2], fijk[3]
    for r in range(1, res + 1):
        if is_class_iii(r):
            i, j, k = _down_ap7(i, j, k)
        else:
            i, j, k = _down_ap7r(i, j, k)
        i, j, k = _ijk_neighbor(i, j, k, get_index_digit(h, r))

    fijk[1], fijk[2], fijk[3] = i, j, k
    return possible_overage


def _h3_to_face_ijk(h: int):
    """Face IJK address [face, i, j, k] of a cell."""
    base_cell = get_base_cell(h)
    if base_cell >= NUM_BASE_CELLS:
        raise InvalidCell(f"invalid base cell in index {h:x}")
    if _is_base_cell_pentagon(base_cell) and _leading_nonzero_digit(h) == 5:
        h = _h3_rotate60cw(h)

    data = T.BASE_CELL_DATA[base_cell]
    fijk = [data[0], data[1][0], data[1][1], data[1][2]]
    if not _h3_to_face_ijk_with_initialized_fijk(h, fijk):
        return fijk

    orig = (fijk[1], fijk[2], fijk[3])
    res = get_resolution(h)
    if is_class_iii(res):
        fijk[1], fijk[2], fijk[3] = _down_ap7r(fijk[1], fijk[2], fijk[3])
        res += 1

    pent_leading_4 = (_is_base_cell_pentagon(base_cell)
                      and _leading_nonzero_digit(h) == 4)
    if _adjust_overage_class_ii(fijk, res, pent_leading_4, False) != NO_OVERAGE:
        if _is_base_cell_pentagon(base_cell):
            while _adjust_overage_class_ii(fijk, res, False, False) != NO_OVERAGE:
                pass
        if res != get_resolution(h):
            fijk[1], fijk[2], fijk[3] = _up_ap7r(fijk[1], fijk[2], fijk[3])
    elif res != get_resolution(h):
        fijk[1], fijk[2], fijk[3] = orig
    return fijk


def lat_lng_to_cell(lat: float, lng: float, res: int) -> int:
    """Index of the cell containing a point (radians) at a resolution."""
    face, i, j, k = _geo_to_face_ijk(lat, lng, res)
    h = _face_ijk_to_h3(face, i, j, k, res)
    if h == 0:
        raise InvalidCell("projection produced an out-of-range address")
    return h


def cell_to_lat_lng(h: int):
    """Center point of a cell, in radians."""
    fijk = _h3_to_face_ijk(h)
    return _face_ijk_to_geo(fijk[0], fijk[1], fijk[2], fijk[3],
                            get_resolution(h))


# --- cell boundary -------------------------------------------------------------

_VERTS_CII = ((2, 1, 0), (1, 2, 0), (0, 2, 1), (0, 1, 2), (1, 0, 2), (2, 0, 1))
_VERTS_CIII = ((5, 4, 0), (1, 5, 0), (0, 5, 4), (0, 1, 5), (4, 0, 5), (5, 0, 1))


def cell_to_boundary(h: int):
    """Vertices of a hexagonal cell boundary, in radians, ccw.

    Pentagons are rejected; the benchmark's urban grids never touch them.
    """
    if is_pentagon(h):
        raise PentagonEncountered(
            f"cell {h3_to_string(h)} is a pentagon; boundary unsupported")
    fijk = _h3_to_face_ijk(h)
    res = get_resolution(h)

    # move to an aperture 33r substrate grid
    adj_res = res
    ci, cj, ck = _down_ap3r(*_down_ap3(fijk[1], fijk[2], fijk[3]))
    if is_class_iii(res):
        ci, cj, ck = _down_ap7r(ci, cj, ck)
        adj_res += 1
    verts_template = _VERTS_CIII if is_class_iii(res) else _VERTS_CII
    center_face = fijk[0]
    fijk_verts = [
        [center_face, *_ijk_normalize(ci + v[0], cj + v[1], ck + v[2])]
        for v in verts_template
    ]

    boundary = []
    last_face = -1
    last_overage = NO_OVERAGE
    extra = 1  # returning the whole loop: recheck first edge for distortion
    for vert in range(6 + extra):
        v = vert % 6
        fv = list(fijk_verts[v])
        overage = _adjust_overage_class_ii(fv, adj_res, False, True)

        # class III cell edges may cross icosahedron edges; add the
        # intersection vertex when the face changes mid-edge
        if is_class_iii(res) and vert > 0 and fv[0] != last_face \
                and last_overage != FACE_EDGE:
            last_v = (v + 5) % 6
            ox0, oy0 = _ijk_to_hex2d(fijk_verts[last_v][1],
                                     fijk_verts[last_v][2],
                                     fijk_verts[last_v][3])
            ox1, oy1 = _ijk_to_hex2d(fijk_verts[v][1], fijk_verts[v][2],
                                     fijk_verts[v][3])
            max_dim = MAX_DIM_BY_CII_RES[adj_res]
            v0 = (3.0 * max_dim, 0.0)
            v1 = (-1.5 * max_dim, 3.0 * M_SQRT3_2 * max_dim)
            v2 = (-1.5 * max_dim, -3.0 * M_SQRT3_2 * max_dim)
            face2 = fv[0] if last_face == center_face else last_face
            adir = T.ADJACENT_FACE_DIR[center_face][face2]
            if adir == IJ_QUADRANT:
                edge0, edge1 = v0, v1
            elif adir == JK_QUADRANT:
                edge0, edge1 = v1, v2
            else:
                edge0, edge1 = v2, v0
            inter = _v2d_intersect((ox0, oy0), (ox1, oy1), edge0, edge1)
            at_vertex = (_v2d_almost_equals((ox0, oy0), inter)
                         or _v2d_almost_equals((ox1, oy1), inter))
            if not at_vertex:
                boundary.append(
                    _hex2d_to_geo(inter[0], inter[1], center_face, adj_res,
                                  True))

        if vert < 6:
            x, y = _ijk_to_hex2d(fv[1], fv[2], fv[3])
            boundary.append(_hex2d_to_geo(x, y, fv[0], adj_res, True))

        last_face = fv[0]
        last_overage = overage
    return boundary


def _v2d_intersect(p0, p1, p2, p3):
    s1x = p1[0] - p0[0]
    s1y = p1[1] - p0[1]
    s2x = p3[0] - p2[0]
    s2y = p3[1] - p2[1]
    t = (s2x * (p0[1] - p2[1]) - s2y * (p0[0] - p2[0])) / \
        (-s2x * s1y + s1x * s2y)
    return p0[0] + t * s1x, p0[1] + t * s1y


_FLT_EPSILON = 1.1920928955078125e-07


def _v2d_almost_equals(a, b):
    return abs(a[0] - b[0]) < _FLT_EPSILON and abs(a[1] - b[1]) < _FLT_EPSILON


# --- neighbor traversal ----------------------------------------------------------

# ring traversal directions, ccw around the origin
_DIRECTIONS = (J_AXES_DIGIT, JK_AXES_DIGIT, K_AXES_DIGIT, IK_AXES_DIGIT,
               I_AXES_DIGIT, IJ_AXES_DIGIT)
_NEXT_RING_DIRECTION = I_AXES_DIGIT

_NEW_DIGIT_II = (
    (0, 1, 2, 3, 4, 5, 6),
    (1, 4, 3, 6, 5, 2, 0),
    (2, 3, 1, 4, 6, 0, 5),
    (3, 6, 4, 5, 0, 1, 2),
    (4, 5, 6, 0, 2, 3, 1),
    (5, 2, 0, 1, 3, 6, 4),
    (6, 0, 5, 2, 1, 4, 3),
)
_NEW_ADJUSTMENT_II = (
    (0, 0, 0, 0, 0, 0, 0),
    (0, 1, 0, 1, 0, 5, 0),
    (0, 0, 2, 3, 0, 0, 2),
    (0, 1, 3, 3, 0, 0, 0),
    (0, 0, 0, 0, 4, 4, 6),
    (0, 5, 0, 0, 4, 5, 0),
    (0, 0, 2, 0, 6, 0, 6),
)
_NEW_DIGIT_III = (
    (0, 1, 2, 3, 4, 5, 6),
    (1, 2, 3, 4, 5, 6, 0),
    (2, 3, 4, 5, 6, 0, 1),
    (3, 4, 5, 6, 0, 1, 2),
    (4, 5, 6, 0, 1, 2, 3),
    (5, 6, 0, 1, 2, 3, 4),
    (6, 0, 1, 2, 3, 4, 5),
)
_NEW_ADJUSTMENT_III = (
    (0, 0, 0, 0, 0, 0, 0),
    (0, 1, 0, 3, 0, 1, 0),
    (0, 0, 2, 2, 0, 0, 6),
    (0, 3, 2, 3, 0, 0, 0),
    (0, 0, 0, 0, 4, 5, 4),
    (0, 1, 0, 0, 5, 5, 0),
    (0, 0, 6, 0, 4, 0, 6),
)


def neighbor_rotations(origin: int, dir: int, rotations: int):
    """The neighbor of ``origin`` in axial direction ``dir``.

    Returns (neighbor index, updated rotation count). Raises
    PentagonEncountered when the step lands in a pentagon's deleted
    k-subsequence.
    """
    current = origin
    if not CENTER_DIGIT <= dir < INVALID_DIGIT:
        raise InvalidCell(f"invalid direction {dir}")
    rotations %= 6
    for _ in range(rotations):
        dir = _ROT60CCW[dir]

    new_rotations = 0
    old_base_cell = get_base_cell(current)
    if old_base_cell >= NUM_BASE_CELLS:
        raise InvalidCell(f"invalid base cell in index {current:x}")
    old_leading_digit = _leading_nonzero_digit(current)

    r = get_resolution(current) - 1
    while True:
        if r == -1:
            current = set_base_cell(
                current, T.BASE_CELL_NEIGHBORS[old_base_cell][dir])
            new_rotations = T.BASE_CELL_NEIGHBOR_60CCW_ROTS[old_base_cell][dir]
            if get_base_cell(current) == INVALID_BASE_CELL:
                # deleted k vertex at the base cell level: this edge
                # actually borders a different neighbor
                current = set_base_cell(
                    current,
                    T.BASE_CELL_NEIGHBORS[old_base_cell][IK_AXES_DIGIT])
                new_rotations = \
                    T.BASE_CELL_NEIGHBOR_60CCW_ROTS[old_base_cell][IK_AXES_DIGIT]
                current = _h3_rotate60ccw(current)
                rotations += 1
            break
        old_digit = get_index_digit(current, r + 1)
        if old_digit == INVALID_DIGIT:
            raise InvalidCell(f"invalid digit in index {current:x}")
        if is_class_iii(r + 1):
            current = set_index_digit(current, r + 1,
                                      _NEW_DIGIT_II[old_digit][dir])
            next_dir = _NEW_ADJUSTMENT_II[old_digit][dir]
        else:
            current = set_index_digit(current, r + 1,
                                      _NEW_DIGIT_III[old_digit][dir])
            next_dir = _NEW_ADJUSTMENT_III[old_digit][dir]
        if next_dir != CENTER_DIGIT:
            dir = next_dir
            r -= 1
        else:
            break

    new_base_cell = get_base_cell(current)
    if _is_base_cell_pentagon(new_base_cell):
        already_adjusted_k = False
        if _leading_nonzero_digit(current) == K_AXES_DIGIT:
            if old_base_cell != new_base_cell:
                # traversed into the deleted k subsequence of a pentagon
                # base cell from outside it
                home_face = T.BASE_CELL_DATA[old_base_cell][0]
                if _base_cell_is_cw_offset(new_base_cell, home_face):
                    current = _h3_rotate60cw(current)
                else:
                    current = _h3_rotate60ccw(current)
                already_adjusted_k = True
            else:
                if old_leading_digit == CENTER_DIGIT:
                    raise PentagonEncountered(
                        "k direction is deleted from a pentagon")
                if old_leading_digit == JK_AXES_DIGIT:
                    current = _h3_rotate60ccw(current)
                    rotations += 1
                elif old_leading_digit == IK_AXES_DIGIT:
                    current = _h3_rotate60cw(current)
                    rotations += 5
                else:
                    raise InvalidCell(
                        f"unexpected traversal state near pentagon {current:x}")

        for _ in range(new_rotations):
            current = _h3_rotate_pent60ccw(current)

        if old_base_cell != new_base_cell:
            if _is_base_cell_polar_pentagon(new_base_cell):
                if old_base_cell != 118 and old_base_cell != 8 and \
                        _leading_nonzero_digit(current) != JK_AXES_DIGIT:
                    rotations += 1
            elif _leading_nonzero_digit(current) == IK_AXES_DIGIT and \
                    not already_adjusted_k:
                rotations += 1
    else:
        for _ in range(new_rotations):
            current = _h3_rotate60ccw(current)

    rotations = (rotations + new_rotations) % 6
    return current, rotations


def direction_for_neighbor(origin: int, destination: int) -> int:
    """Axial digit (1-6) of the neighbor slot of ``origin`` holding
    ``destination``, or INVALID_DIGIT if not adjacent."""
    start = J_AXES_DIGIT if is_pentagon(origin) else K_AXES_DIGIT
    for direction in range(start, INVALID_DIGIT):
        try:
            neighbor, _ = neighbor_rotations(origin, direction, 0)
        except PentagonEncountered:
            continue
        if neighbor == destination:
            return direction
    return INVALID_DIGIT


def grid_disk_distances_unsafe(origin: int, k: int):
    """Spiral disk traversal. Fast, but raises PentagonEncountered when the
    disk touches a pentagon or its distortion area."""
    out = [origin]
    dists = [0]
    if is_pentagon(origin):
        raise PentagonEncountered("origin is a pentagon")

    ring = 1
    direction = 0
    i = 0
    rotations = 0
    while ring <= k:
        if direction == 0 and i == 0:
            origin, rotations = neighbor_rotations(
                origin, _NEXT_RING_DIRECTION, rotations)
            if is_pentagon(origin):
                raise PentagonEncountered("disk crosses a pentagon")
        origin, rotations = neighbor_rotations(
            origin, _DIRECTIONS[direction], rotations)
        out.append(origin)
        dists.append(ring)
        i += 1
        if i == ring:
            i = 0
            direction += 1
            if direction == 6:
                direction = 0
                ring += 1
        if is_pentagon(origin):
            raise PentagonEncountered("disk crosses a pentagon")
    return out, dists


def grid_disk_distances_safe(origin: int, k: int):
    """BFS disk traversal; always defined, including around pentagons."""
    dist = {origin: 0}
    frontier = [origin]
    d = 0
    while d < k and frontier:
        nxt = []
        for h in frontier:
            for direction in _DIRECTIONS:
                try:
                    neighbor, _ = neighbor_rotations(h, direction, 0)
                except PentagonEncountered:
                    continue
                if neighbor not in dist:
                    dist[neighbor] = d + 1
                    nxt.append(neighbor)
        frontier = nxt
        d += 1
    return dist


def grid_disk(origin: int, k: int):
    """Cells within grid distance k, with distances; pentagon-safe."""
    try:
        out, dists = grid_disk_distances_unsafe(origin, k)
        return dict(zip(out, dists))
    except PentagonEncountered:
        return grid_disk_distances_safe(origin, k)


def grid_ring_unsafe(origin: int, k: int):
    """Hollow ring at exact distance k, in traversal order.

    Raises PentagonEncountered on pentagon distortion; callers may fall
    back to a disk difference."""
    if k == 0:
        return [origin]
    if is_pentagon(origin):
        raise PentagonEncountered("origin is a pentagon")
    rotations = 0
    for _ in range(k):
        origin, rotations = neighbor_rotations(
            origin, _NEXT_RING_DIRECTION, rotations)
        if is_pentagon(origin):
            raise PentagonEncountered("ring crosses a pentagon")
    last_index = origin
    out = [origin]
    for direction in range(6):
        for pos in range(k):
            origin, rotations = neighbor_rotations(
                origin, _DIRECTIONS[direction], rotations)
            if pos != k - 1 or direction != 5:
                out.append(origin)
                if is_pentagon(origin):
                    raise PentagonEncountered("ring crosses a pentagon")
    if last_index != origin:
        raise PentagonEncountered("ring distorted by a pentagon")
    return out


# --- local IJK coordinates --------------------------------------------------------

# origin leading digit -> index leading digit -> 60deg cw rotations
_PENTAGON_ROTATIONS = (
    (0, -1, 0, 0, 0, 0, 0),
    (-1, -1, -1, -1, -1, -1, -1),
    (0, -1, 0, 0, 0, 1, 0),
    (0, -1, 0, 0, 1, 1, 0),
    (0, -1, 0, 5, 0, 0, 0),
    (0, -1, 5, 5, 0, 0, 0),
    (0, -1, 0, 0, 0, 0, 0),
)
_PENTAGON_ROTATIONS_REVERSE = (
    (0, 0, 0, 0, 0, 0, 0),
    (-1, -1, -1, -1, -1, -1, -1),
    (0, 1, 0, 0, 0, 0, 0),
    (0, 1, 0, 0, 0, 1, 0),
    (0, 5, 0, 0, 0, 0, 0),
    (0, 5, 0, 5, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0),
)
_PENTAGON_ROTATIONS_REVERSE_NONPOLAR = (
    (0, 0, 0, 0, 0, 0, 0),
    (-1, -1, -1, -1, -1, -1, -1),
    (0, 1, 0, 0, 0, 0, 0),
    (0, 1, 0, 0, 0, 1, 0),
    (0, 5, 0, 0, 0, 0, 0),
    (0, 1, 0, 5, 1, 1, 0),
    (0, 0, 0, 0, 0, 0, 0),
)
_PENTAGON_ROTATIONS_REVERSE_POLAR = (
    (0, 0, 0, 0, 0, 0, 0),
    (-1, -1, -1, -1, -1, -1, -1),
    (0, 1, 1, 1, 1, 1, 1),
    (0, 1, 0, 0, 0, 1, 0),
    (0, 1, 0, 0, 1, 1, 1),
    (0, 1, 0, 5, 1, 1, 0),
    (0, 1, 1, 0, 1, 1, 1),
)
# unfolding across more than one icosahedron face is not permitted
_FAILED_DIRECTIONS = (
    (False, False, False, False, False, False, False),
    (False, False, False, False, False, False, False),
    (False, False, False, False, True, True, False),
    (False, False, False, False, True, False, True),
    (False, False, True, True, False, False, False),
    (False, False, True, False, False, False, True),
    (False, False, False, True, False, True, False),
)


def _get_base_cell_direction(origin_bc: int, neighbor_bc: int) -> int:
    for direction in range(CENTER_DIGIT, INVALID_DIGIT):
        if T.BASE_CELL_NEIGHBORS[origin_bc][direction] == neighbor_bc:
            return direction
    return INVALID_DIGIT


def cell_to_local_ijk(origin: int, h3: int):
    """IJK+ coordinates of ``h3`` in a local frame anchored at ``origin``.

    Raises DistanceUndefined when the pair cannot be unfolded onto one
    coordinate frame (too far apart, or across pentagon distortion).
    """
    res = get_resolution(origin)
    if res != get_resolution(h3):
        raise DistanceUndefined("resolution mismatch")

    origin_bc = get_base_cell(origin)
    base_cell = get_base_cell(h3)
    if origin_bc >= NUM_BASE_CELLS or base_cell >= NUM_BASE_CELLS:
        raise InvalidCell("invalid base cell")

    dir = CENTER_DIGIT
    rev_dir = CENTER_DIGIT
    if origin_bc != base_cell:
        dir = _get_base_cell_direction(origin_bc, base_cell)
        if dir == INVALID_DIGIT:
            raise DistanceUndefined("base cells are not neighbors")
        rev_dir = _get_base_cell_direction(base_cell, origin_bc)

    origin_on_pent = _is_base_cell_pentagon(origin_bc)
    index_on_pent = _is_base_cell_pentagon(base_cell)

    if dir != CENTER_DIGIT:
        # rotate index into the origin base cell's orientation
        base_cell_rotations = \
            T.BASE_CELL_NEIGHBOR_60CCW_ROTS[origin_bc][dir]
        if index_on_pent:
            for _ in range(base_cell_rotations):
                h3 = _h3_rotate_pent60cw(h3)
                rev_dir = _ROT60CW[rev_dir]
                if rev_dir == K_AXES_DIGIT:
                    rev_dir = _ROT60CW[rev_dir]
        else:
            for _ in range(base_cell_rotations):
                h3 = _h3_rotate60cw(h3)
                rev_dir = _ROT60CW[rev_dir]

    fijk = [0, 0, 0, 0]
    _h3_to_face_ijk_with_initialized_fijk(h3, fijk)
    i, j, k = fijk[1], fijk[2], fijk[3]

    if dir != CENTER_DIGIT:
        pentagon_rotations = 0
        direction_rotations = 0
        if origin_on_pent:
            origin_leading = _leading_nonzero_digit(origin)
            if _FAILED_DIRECTIONS[origin_leading][dir]:
                raise DistanceUndefined(
                    "cannot unfold across pentagon distortion")
            direction_rotations = _PENTAGON_ROTATIONS[origin_leading][dir]
            pentagon_rotations = direction_rotations
        elif index_on_pent:
            index_leading = _leading_nonzero_digit(h3)
            if _FAILED_DIRECTIONS[index_leading][rev_dir]:
                raise DistanceUndefined(
                    "cannot unfold across pentagon distortion")
            pentagon_rotations = _PENTAGON_ROTATIONS[rev_dir][index_leading]

        if pentagon_rotations < 0 or direction_rotations < 0:
            raise InvalidCell("invalid k-axis digit")

        for _ in range(pentagon_rotations):
            i, j, k = _ijk_rotate60cw(i, j, k)

        oi, oj, ok = _ijk_neighbor(0, 0, 0, dir)
        for r in range(res - 1, -1, -1):
            if is_class_iii(r + 1):
                oi, oj, ok = _down_ap7(oi, oj, ok)
            else:
                oi, oj, ok = _down_ap7r(oi, oj, ok)
        for _ in range(direction_rotations):
            oi, oj, ok = _ijk_rotate60cw(oi, oj, ok)

        i, j, k = _ijk_normalize(i + oi, j + oj, k + ok)
    elif origin_on_pent and index_on_pent:
        origin_leading = _leading_nonzero_digit(origin)
        index_leading = _leading_nonzero_digit(h3)
        if _FAILED_DIRECTIONS[origin_leading][index_leading]:
            raise DistanceUndefined(
                "cannot unfold across pentagon distortion")
        within = _PENTAGON_ROTATIONS[origin_leading][index_leading]
        if within < 0:
            raise InvalidCell("invalid k-axis digit")
        for _ in range(within):
            i, j, k = _ijk_rotate60cw(i, j, k)

    return i, j, k


def local_ijk_to_cell(origin: int, ijk) -> int:
    """Inverse of cell_to_local_ijk."""
    res = get_resolution(origin)
    origin_bc = get_base_cell(origin)
    if origin_bc >= NUM_BASE_CELLS:
        raise InvalidCell("invalid base cell")
    origin_on_pent = _is_base_cell_pentagon(origin_bc)

    out = H3_INIT
    out = (out & ~(15 << _MODE_OFFSET)) | (CELL_MODE << _MODE_OFFSET)
    out = set_resolution(out, res)

    if res == 0:
        dir = _unit_ijk_to_digit(*ijk)
        if dir == INVALID_DIGIT:
            raise DistanceUndefined("coordinates too far from origin")
        new_base_cell = T.BASE_CELL_NEIGHBORS[origin_bc][dir]
        if new_base_cell == INVALID_BASE_CELL:
            raise PentagonEncountered("deleted direction off a pentagon")
        return set_base_cell(out, new_base_cell)

    i, j, k = ijk
    for r in range(res - 1, -1, -1):
        li, lj, lk = i, j, k
        if is_class_iii(r + 1):
            i, j, k = _up_ap7(i, j, k)
            ci, cj, ck = _down_ap7(i, j, k)
        else:
            i, j, k = _up_ap7r(i, j, k)
            ci, cj, ck = _down_ap7r(i, j, k)
        out = set_index_digit(
            out, r + 1, _unit_ijk_to_digit(li - ci, lj - cj, lk - ck))

    if i > 1 or j > 1 or k > 1:
        raise DistanceUndefined("coordinates too far from origin")

    dir = _unit_ijk_to_digit(i, j, k)
    base_cell = T.BASE_CELL_NEIGHBORS[origin_bc][dir]
    index_on_pent = (base_cell != INVALID_BASE_CELL
                     and _is_base_cell_pentagon(base_cell))

    if dir != CENTER_DIGIT:
        pentagon_rotations = 0
        if origin_on_pent:
            origin_leading = _leading_nonzero_digit(origin)
            pentagon_rotations = \
                _PENTAGON_ROTATIONS_REVERSE[origin_leading][dir]
            for _ in range(pentagon_rotations):
                dir = _ROT60CCW[dir]
            if dir == K_AXES_DIGIT:
                raise PentagonEncountered(
                    "moving into a deleted pentagon subsequence")
            base_cell = T.BASE_CELL_NEIGHBORS[origin_bc][dir]
            index_on_pent = _is_base_cell_pentagon(base_cell)

        base_cell_rotations = T.BASE_CELL_NEIGHBOR_60CCW_ROTS[origin_bc][dir]
        if index_on_pent:
            rev_dir = _get_base_cell_direction(base_cell, origin_bc)
            for _ in range(base_cell_rotations):
                out = _h3_rotate60ccw(out)
            index_leading = _leading_nonzero_digit(out)
            if _is_base_cell_polar_pentagon(base_cell):
                pentagon_rotations = \
                    _PENTAGON_ROTATIONS_REVERSE_POLAR[rev_dir][index_leading]
            else:
                pentagon_rotations = \
                    _PENTAGON_ROTATIONS_REVERSE_NONPOLAR[rev_dir][index_leading]
            if pentagon_rotations < 0:
                raise InvalidCell("invalid k-axis digit")
            for _ in range(pentagon_rotations):
                out = _h3_rotate_pent60ccw(out)
        else:
            if pentagon_rotations < 0:
                raise InvalidCell("invalid k-axis digit")
            for _ in range(pentagon_rotations):
                out = _h3_rotate60ccw(out)
            for _ in range(base_cell_rotations):
                out = _h3_rotate60ccw(out)
    elif origin_on_pent and index_on_pent:
        origin_leading = _leading_nonzero_digit(origin)
        index_leading = _leading_nonzero_digit(out)
        within = _PENTAGON_ROTATIONS_REVERSE[origin_leading][index_leading]
        if within < 0:
            raise InvalidCell("invalid k-axis digit")
        for _ in range(within):
            out = _h3_rotate60ccw(out)

    if index_on_pent and _leading_nonzero_digit(out) == K_AXES_DIGIT:
        raise PentagonEncountered(
            "coordinates land in a deleted pentagon subsequence")

    return set_base_cell(out, base_cell)


def grid_distance(a: int, b: int) -> int:
    """Minimal number of neighbor steps between two cells."""
    a_ijk = cell_to_local_ijk(a, a)
    b_ijk = cell_to_local_ijk(a, b)
    return _ijk_distance(a_ijk, b_ijk)


def grid_path_cells(a: int, b: int):
    """Shortest path from a to b as linear interpolation in local IJK.

    Deterministic: ties round via cube-coordinate rounding toward the
    largest component adjustment.
    """
    distance = grid_distance(a, b)
    si, sj, sk = cell_to_local_ijk(a, a)
    ei, ej, ek = cell_to_local_ijk(a, b)

    # cube coordinates
    s_i, s_j = -si + sk, sj - sk
    s_k = -s_i - s_j
    e_i, e_j = -ei + ek, ej - ek
    e_k = -e_i - e_j

    if distance:
        i_step = (e_i - s_i) / distance
        j_step = (e_j - s_j) / distance
        k_step = (e_k - s_k) / distance
    else:
        i_step = j_step = k_step = 0.0

    out = []
    for n in range(distance + 1):
        ci, cj, ck = _cube_round(s_i + i_step * n, s_j + j_step * n,
                                 s_k + k_step * n)
        # cube -> ijk+
        ni, nj, nk = _ijk_normalize(-ci, cj, 0)
        out.append(local_ijk_to_cell(a, (ni, nj, nk)))
    return out


def _cube_round(i: float, j: float, k: float):
    ri = _round_half_away(i)
    rj = _round_half_away(j)
    rk = _round_half_away(k)
    i_diff = abs(ri - i)
    j_diff = abs(rj - j)
    k_diff = abs(rk - k)
    if i_diff > j_diff and i_diff > k_diff:
        ri = -rj - rk
    elif j_diff > k_diff:
        rj = -ri - rk
    else:
        rk = -ri - rj
    return ri, rj, rk
