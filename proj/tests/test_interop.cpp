// Cross-checks the binary readers against files produced by an independent
// tool chain (Python's stdlib zipfile/zlib/struct), covering the compressed
// variants our own writers never emit.
#include "adagent/dataio.hpp"
#include "adagent/subprocess.hpp"
#include "adagent/util.hpp"
#include "support/test_support.hpp"

#include "doctest.h"

using namespace adagent;
namespace fs = std::filesystem;

namespace {

void run_python(const std::string& code, const fs::path& cwd) {
    ProcessSpec spec;
    spec.argv = split_command(test::python_interpreter());
    spec.argv.push_back("-c");
    spec.argv.push_back(code);
    spec.working_dir = cwd;
    spec.timeout_s = 30.0;
    const ProcessResult run = run_process(spec);
    REQUIRE_MESSAGE(run.ok(), run.stderr_text);
}

} // namespace

TEST_CASE("npz reader: deflate-compressed entries written by python zipfile") {
    TempDir dir("interop-npz");
    // a 3x2 float64 X plus a length-3 int64 y, deflated like savez_compressed
    run_python(R"PY(
import struct, zipfile

def npy(fmt, shape, values, descr):
    header = "{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (descr, shape)
    pad = (64 - (10 + len(header) + 1) % 64) % 64
    header = header + " " * pad + "\n"
    out = b"\x93NUMPY\x01\x00" + struct.pack("<H", len(header)) + header.encode()
    return out + struct.pack("<%d%s" % (len(values), fmt), *values)

x = npy("d", "(3, 2)", [1.5, 2.5, 3.5, 4.5, 5.5, 6.5], "<f8")
y = npy("q", "(3,)", [0, 1, 0], "<i8")
with zipfile.ZipFile("t.npz", "w", compression=zipfile.ZIP_DEFLATED) as zf:
    zf.writestr("X.npy", x)
    zf.writestr("y.npy", y)
)PY",
               dir.path());

    const Dataset loaded = load_dataset_file(dir.path() / "t.npz");
    REQUIRE(loaded.tabular.has_value());
    CHECK(loaded.tabular->x.rows == 3);
    CHECK(loaded.tabular->x.cols == 2);
    CHECK(loaded.tabular->x.at(0, 0) == 1.5);
    CHECK(loaded.tabular->x.at(2, 1) == 6.5);
    REQUIRE(loaded.tabular->labels.has_value());
    CHECK(*loaded.tabular->labels == std::vector<int>{0, 1, 0});
}

TEST_CASE("npz reader: fortran-order payloads are transposed on load") {
    TempDir dir("interop-f");
    run_python(R"PY(
import struct, zipfile
header = "{'descr': '<f8', 'fortran_order': True, 'shape': (2, 3), }"
pad = (64 - (10 + len(header) + 1) % 64) % 64
header = header + " " * pad + "\n"
# column-major for [[1,2,3],[4,5,6]]
payload = (b"\x93NUMPY\x01\x00" + struct.pack("<H", len(header)) + header.encode() +
           struct.pack("<6d", 1.0, 4.0, 2.0, 5.0, 3.0, 6.0))
with zipfile.ZipFile("f.npz", "w") as zf:
    zf.writestr("X.npy", payload)
)PY",
               dir.path());

    const Dataset loaded = load_dataset_file(dir.path() / "f.npz");
    CHECK(loaded.tabular->x.at(0, 0) == 1.0);
    CHECK(loaded.tabular->x.at(0, 2) == 3.0);
    CHECK(loaded.tabular->x.at(1, 0) == 4.0);
    CHECK(loaded.tabular->x.at(1, 2) == 6.0);
}

TEST_CASE("mat reader: zlib-compressed elements like scipy's default output") {
    TempDir dir("interop-mat");
    run_python(R"PY(
import struct, zlib

def element(dtype, payload):
    pad = (8 - len(payload) % 8) % 8
    return struct.pack("<II", dtype, len(payload)) + payload + b"\x00" * pad

def matrix(name, rows, cols, values):
    body = element(6, struct.pack("<II", 6, 0))                 # flags: double class
    body += element(5, struct.pack("<ii", rows, cols))          # dims
    body += element(1, name.encode())                           # name
    body += element(9, struct.pack("<%dd" % len(values), *values))  # column-major data
    return struct.pack("<II", 14, len(body)) + body

header = b"MATLAB 5.0 MAT-file, python interop".ljust(116) + b"\x00" * 8
header += struct.pack("<H", 0x0100) + b"IM"

x = matrix("X", 2, 2, [1.0, 3.0, 2.0, 4.0])   # [[1,2],[3,4]]
y = matrix("y", 2, 1, [0.0, 1.0])
compressed = b""
for m in (x, y):
    z = zlib.compress(m)
    compressed += struct.pack("<II", 15, len(z)) + z
open("c.mat", "wb").write(header + compressed)
)PY",
               dir.path());

    const Dataset loaded = load_dataset_file(dir.path() / "c.mat");
    REQUIRE(loaded.tabular.has_value());
    CHECK(loaded.tabular->x.rows == 2);
    CHECK(loaded.tabular->x.cols == 2);
    CHECK(loaded.tabular->x.at(0, 0) == 1.0);
    CHECK(loaded.tabular->x.at(0, 1) == 2.0);
    CHECK(loaded.tabular->x.at(1, 0) == 3.0);
    CHECK(loaded.tabular->x.at(1, 1) == 4.0);
    CHECK(*loaded.tabular->labels == std::vector<int>{0, 1});
}

TEST_CASE("our mat and npz writers are readable by independent python loaders") {
    TempDir dir("interop-back");
    Matrix x;
    x.rows = 4;
    x.cols = 3;
    x.values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<int> y{0, 1, 0, 1};
    write_mat_tabular(dir.path() / "w.mat", x, y);
    write_npz_tabular(dir.path() / "w.npz", x, y);

    // independent minimal readers; they fail loudly on any format slip
    run_python(R"PY(
import struct, zipfile, ast

def read_npy(b):
    assert b[:6] == b"\x93NUMPY", "bad magic"
    hlen = struct.unpack_from("<H", b, 8)[0]
    meta = ast.literal_eval(b[10:10 + hlen].decode("latin1"))
    count = 1
    for s in meta["shape"]:
        count *= s
    fmt = {"<f8": "d"}[meta["descr"]]
    return meta["shape"], struct.unpack_from("<%d%s" % (count, fmt), b, 10 + hlen)

with zipfile.ZipFile("w.npz") as zf:
    shape, vals = read_npy(zf.read("X.npy"))
    assert shape == (4, 3), shape
    assert vals[0] == 1.0 and vals[11] == 12.0, vals
    yshape, yvals = read_npy(zf.read("y.npy"))
    assert yvals == (0.0, 1.0, 0.0, 1.0), yvals

mat = open("w.mat", "rb").read()
assert mat[126:128] == b"IM", "bad endian marker"

def elements(buf, pos, end):
    while pos + 8 <= end:
        dtype, nbytes = struct.unpack_from("<II", buf, pos)
        if dtype >> 16:
            yield dtype & 0xFFFF, buf[pos + 4:pos + 4 + (dtype >> 16)]
            pos += 8
        else:
            yield dtype, buf[pos + 8:pos + 8 + nbytes]
            pos += 8 + nbytes + ((8 - nbytes % 8) % 8)

names = []
for dtype, payload in elements(mat, 128, len(mat)):
    assert dtype == 14, dtype
    sub = list(elements(payload, 0, len(payload)))
    dims = struct.unpack("<2i", sub[1][1])
    names.append((sub[2][1].rstrip(b"\x00").decode(), dims))
assert ("X", (4, 3)) in names and ("y", (4, 1)) in names, names
)PY",
               dir.path());
}
