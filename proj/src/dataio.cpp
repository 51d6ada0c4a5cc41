#include "adagent/dataio.hpp"

#include "adagent/errors.hpp"
#include "adagent/util.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace adagent {

namespace fs = std::filesystem;

const char* to_string(DataFormat f) {
    switch (f) {
        case DataFormat::mat: return "mat";
        case DataFormat::csv: return "csv";
        case DataFormat::npz: return "npz";
        case DataFormat::graph_bundle: return "graph_bundle";
        case DataFormat::ts_bundle: return "ts_bundle";
    }
    return "?";
}

namespace {

// ---------------------------------------------------------------- binary io

std::string read_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::MissingDataset, "cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

class ByteReader {
public:
    ByteReader(const std::string& bytes, std::string origin)
        : bytes_(bytes), origin_(std::move(origin)) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    bool eof() const { return pos_ >= bytes_.size(); }

    void seek(std::size_t p) {
        if (p > bytes_.size()) fail("seek past end");
        pos_ = p;
    }

    void skip(std::size_t n) { seek(pos_ + n); }

    const char* raw(std::size_t n) {
        if (remaining() < n) fail("truncated data");
        const char* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }

    template <typename T>
    T read() {
        T v{};
        std::memcpy(&v, raw(sizeof(T)), sizeof(T));
        return v;
    }

    std::string read_string(std::size_t n) { return std::string(raw(n), n); }

    [[noreturn]] void fail(const std::string& what) const {
        raise(Errc::CorruptFile, origin_ + ": " + what);
    }

private:
    const std::string& bytes_;
    std::string origin_;
    std::size_t pos_ = 0;
};

template <typename T>
void append_pod(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

std::string zlib_inflate(const char* data, std::size_t size, int window_bits,
                         const std::string& origin) {
    z_stream zs{};
    if (inflateInit2(&zs, window_bits) != Z_OK)
        raise(Errc::CorruptFile, origin + ": zlib init failed");
    std::string out;
    std::vector<char> buf(1 << 16);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
    zs.avail_in = static_cast<uInt>(size);
    for (;;) {
        zs.next_out = reinterpret_cast<Bytef*>(buf.data());
        zs.avail_out = static_cast<uInt>(buf.size());
        const int rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            raise(Errc::CorruptFile, origin + ": corrupt compressed stream");
        }
        out.append(buf.data(), buf.size() - zs.avail_out);
        if (rc == Z_STREAM_END) break;
        if (zs.avail_in == 0 && zs.avail_out != 0) {
            // ran out of input without reaching the stream end
            inflateEnd(&zs);
            raise(Errc::CorruptFile, origin + ": truncated compressed stream");
        }
    }
    inflateEnd(&zs);
    return out;
}

// ----------------------------------------------------------------- MAT v5

// Subset of the Level-5 MAT format: 2-D numeric matrices, optionally inside
// zlib-compressed elements. Enough for ADBench-style X/y containers.

enum MatDataType : std::uint32_t {
    miINT8 = 1,
    miUINT8 = 2,
    miINT16 = 3,
    miUINT16 = 4,
    miINT32 = 5,
    miUINT32 = 6,
    miSINGLE = 7,
    miDOUBLE = 9,
    miINT64 = 12,
    miUINT64 = 13,
    miMATRIX = 14,
    miCOMPRESSED = 15,
};

constexpr std::uint32_t mxDOUBLE_CLASS = 6;

struct MatElement {
    std::uint32_t type = 0;
    std::string payload;
};

MatElement read_mat_element(ByteReader& r) {
    MatElement el;
    const auto tag = r.read<std::uint32_t>();
    if (tag >> 16) {
        // small data element: size and type packed into one word
        el.type = tag & 0xFFFF;
        const std::uint32_t nbytes = tag >> 16;
        if (nbytes > 4) r.fail("small element longer than 4 bytes");
        el.payload = r.read_string(nbytes);
        r.skip(4 - nbytes);
        return el;
    }
    el.type = tag;
    const auto nbytes = r.read<std::uint32_t>();
    el.payload = r.read_string(nbytes);
    const std::size_t pad = (8 - nbytes % 8) % 8;
    if (el.type != miCOMPRESSED) r.skip(std::min<std::size_t>(pad, r.remaining()));
    return el;
}

std::vector<double> decode_numeric(std::uint32_t type, const std::string& payload,
                                   const std::string& origin) {
    std::vector<double> out;
    auto decode = [&](auto tag) {
        using T = decltype(tag);
        const std::size_t n = payload.size() / sizeof(T);
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            T v{};
            std::memcpy(&v, payload.data() + i * sizeof(T), sizeof(T));
            out.push_back(static_cast<double>(v));
        }
    };
    switch (type) {
        case miDOUBLE: decode(double{}); break;
        case miSINGLE: decode(float{}); break;
        case miINT8: decode(std::int8_t{}); break;
        case miUINT8: decode(std::uint8_t{}); break;
        case miINT16: decode(std::int16_t{}); break;
        case miUINT16: decode(std::uint16_t{}); break;
        case miINT32: decode(std::int32_t{}); break;
        case miUINT32: decode(std::uint32_t{}); break;
        case miINT64: decode(std::int64_t{}); break;
        case miUINT64: decode(std::uint64_t{}); break;
        default: raise(Errc::CorruptFile, origin + ": unsupported numeric type in matrix");
    }
    return out;
}

// Parses one miMATRIX payload into (name, matrix). Non-numeric and >2-D
// arrays come back with rows == 0 and are skipped by the caller.
std::pair<std::string, Matrix> parse_mat_matrix(const std::string& payload,
                                                const std::string& origin) {
    ByteReader r(payload, origin);
    const MatElement flags = read_mat_element(r);
    if (flags.payload.size() < 8) r.fail("short array-flags element");
    std::uint32_t flag_word = 0;
    std::memcpy(&flag_word, flags.payload.data(), 4);
    const std::uint32_t array_class = flag_word & 0xFF;

    const MatElement dims_el = read_mat_element(r);
    const std::vector<double> dims = decode_numeric(dims_el.type, dims_el.payload, origin);

    const MatElement name_el = read_mat_element(r);
    std::string name = name_el.payload;
    while (!name.empty() && name.back() == '\0') name.pop_back();

    Matrix m;
    const bool numeric = array_class >= 6 && array_class <= 15;
    if (!numeric || dims.size() != 2) return {name, m};

    const MatElement data_el = read_mat_element(r);
    const std::vector<double> col_major = decode_numeric(data_el.type, data_el.payload, origin);
    const auto rows = static_cast<std::size_t>(dims[0]);
    const auto cols = static_cast<std::size_t>(dims[1]);
    if (col_major.size() != rows * cols) r.fail("matrix size does not match dimensions");
    m.rows = rows;
    m.cols = cols;
    m.values.resize(rows * cols);
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t rr = 0; rr < rows; ++rr) m.values[rr * cols + c] = col_major[c * rows + rr];
    return {name, m};
}

std::map<std::string, Matrix> read_mat_file(const fs::path& path) {
    const std::string bytes = read_binary(path);
    const std::string origin = path.filename().string();
    if (bytes.size() < 128) raise(Errc::CorruptFile, origin + ": shorter than a MAT header");
    if (!(bytes[126] == 'I' && bytes[127] == 'M')) {
        if (bytes[126] == 'M' && bytes[127] == 'I')
            raise(Errc::UnsupportedFormat, origin + ": big-endian MAT files are not supported");
        raise(Errc::CorruptFile, origin + ": missing MAT endian marker");
    }
    ByteReader r(bytes, origin);
    r.seek(128);
    std::map<std::string, Matrix> out;
    while (!r.eof() && r.remaining() >= 8) {
        MatElement el = read_mat_element(r);
        if (el.type == miCOMPRESSED) {
            const std::string inner = zlib_inflate(el.payload.data(), el.payload.size(), 15, origin);
            ByteReader ir(inner, origin);
            el = read_mat_element(ir);
        }
        if (el.type != miMATRIX) continue;
        auto [name, matrix] = parse_mat_matrix(el.payload, origin);
        if (!name.empty() && matrix.rows > 0) out[name] = std::move(matrix);
    }
    return out;
}

void append_mat_element(std::string& out, std::uint32_t type, const std::string& payload) {
    append_pod<std::uint32_t>(out, type);
    append_pod<std::uint32_t>(out, static_cast<std::uint32_t>(payload.size()));
    out += payload;
    out.append((8 - payload.size() % 8) % 8, '\0');
}

std::string encode_mat_matrix(const std::string& name, const Matrix& m) {
    std::string body;
    std::string flags;
    append_pod<std::uint32_t>(flags, mxDOUBLE_CLASS);
    append_pod<std::uint32_t>(flags, 0);
    append_mat_element(body, miUINT32, flags);

    std::string dims;
    append_pod<std::int32_t>(dims, static_cast<std::int32_t>(m.rows));
    append_pod<std::int32_t>(dims, static_cast<std::int32_t>(m.cols));
    append_mat_element(body, miINT32, dims);

    append_mat_element(body, miINT8, name);

    std::string data;
    data.reserve(m.rows * m.cols * 8);
    for (std::size_t c = 0; c < m.cols; ++c)
        for (std::size_t r = 0; r < m.rows; ++r) append_pod<double>(data, m.at(r, c));
    append_mat_element(body, miDOUBLE, data);

    std::string out;
    append_pod<std::uint32_t>(out, miMATRIX);
    append_pod<std::uint32_t>(out, static_cast<std::uint32_t>(body.size()));
    out += body;
    return out;
}

void write_mat_file(const fs::path& path, const std::vector<std::pair<std::string, Matrix>>& vars) {
    std::string out;
    std::string header = "MATLAB 5.0 MAT-file, created by ad-agent";
    header.resize(116, ' ');
    out += header;
    out.append(8, '\0');               // subsystem offset: none
    append_pod<std::uint16_t>(out, 0x0100); // version
    out += "IM";                        // little-endian marker
    for (const auto& [name, m] : vars) out += encode_mat_matrix(name, m);
    write_text_file(path, out);
}

// ----------------------------------------------------------------- NPY/NPZ

struct NpyArray {
    std::vector<std::size_t> shape;
    std::vector<double> values; // row-major
};

NpyArray parse_npy(const std::string& bytes, const std::string& origin) {
    ByteReader r(bytes, origin);
    if (r.remaining() < 10 || std::memcmp(r.raw(6), "\x93NUMPY", 6) != 0)
        r.fail("missing NPY magic");
    const auto major = r.read<std::uint8_t>();
    r.read<std::uint8_t>(); // minor
    std::size_t header_len = 0;
    if (major == 1) {
        header_len = r.read<std::uint16_t>();
    } else {
        header_len = r.read<std::uint32_t>();
    }
    const std::string header = r.read_string(header_len);

    auto field = [&](const std::string& key) -> std::string {
        const auto at = header.find("'" + key + "'");
        if (at == std::string::npos) r.fail("NPY header lacks " + key);
        auto colon = header.find(':', at);
        auto end = colon + 1;
        int depth = 0;
        while (end < header.size()) {
            const char c = header[end];
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (c == ',' && depth == 0) break;
            if (c == '}' && depth == 0) break;
            ++end;
        }
        return trim(header.substr(colon + 1, end - colon - 1));
    };

    std::string descr = field("descr");
    if (descr.size() >= 2 && (descr.front() == '\'' || descr.front() == '"'))
        descr = descr.substr(1, descr.size() - 2);
    const bool fortran = field("fortran_order").find("True") != std::string::npos;

    std::string shape_text = field("shape");
    NpyArray arr;
    std::size_t dim = 0;
    bool in_num = false;
    for (char c : shape_text) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            dim = dim * 10 + static_cast<std::size_t>(c - '0');
            in_num = true;
        } else if (in_num) {
            arr.shape.push_back(dim);
            dim = 0;
            in_num = false;
        }
    }
    if (in_num) arr.shape.push_back(dim);

    std::size_t count = 1;
    for (auto s : arr.shape) count *= s;
    if (arr.shape.empty()) count = 1;

    auto decode = [&](auto tag) {
        using T = decltype(tag);
        if (r.remaining() < count * sizeof(T)) r.fail("NPY data truncated");
        const char* p = r.raw(count * sizeof(T));
        arr.values.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            T v{};
            std::memcpy(&v, p + i * sizeof(T), sizeof(T));
            arr.values.push_back(static_cast<double>(v));
        }
    };
    if (descr == "<f8") decode(double{});
    else if (descr == "<f4") decode(float{});
    else if (descr == "<i8") decode(std::int64_t{});
    else if (descr == "<i4") decode(std::int32_t{});
    else if (descr == "<i2") decode(std::int16_t{});
    else if (descr == "<u8") decode(std::uint64_t{});
    else if (descr == "<u4") decode(std::uint32_t{});
    else if (descr == "<u2") decode(std::uint16_t{});
    else if (descr == "|i1") decode(std::int8_t{});
    else if (descr == "|u1" || descr == "|b1") decode(std::uint8_t{});
    else r.fail("unsupported NPY dtype " + descr);

    if (fortran && arr.shape.size() == 2) {
        std::vector<double> rm(arr.values.size());
        const std::size_t rows = arr.shape[0], cols = arr.shape[1];
        for (std::size_t c = 0; c < cols; ++c)
            for (std::size_t rr = 0; rr < rows; ++rr) rm[rr * cols + c] = arr.values[c * rows + rr];
        arr.values = std::move(rm);
    }
    return arr;
}

std::string encode_npy(const NpyArray& arr) {
    std::string shape = "(";
    for (std::size_t i = 0; i < arr.shape.size(); ++i) {
        shape += std::to_string(arr.shape[i]);
        if (arr.shape.size() == 1 || i + 1 < arr.shape.size()) shape += ",";
        if (i + 1 < arr.shape.size()) shape += " ";
    }
    shape += ")";
    std::string header =
        "{'descr': '<f8', 'fortran_order': False, 'shape': " + shape + ", }";
    const std::size_t unpadded = 10 + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header.push_back('\n');

    std::string out = "\x93NUMPY";
    out.push_back('\x01');
    out.push_back('\x00');
    append_pod<std::uint16_t>(out, static_cast<std::uint16_t>(header.size()));
    out += header;
    for (double v : arr.values) append_pod<double>(out, v);
    return out;
}

std::map<std::string, NpyArray> read_npz_file(const fs::path& path) {
    const std::string bytes = read_binary(path);
    const std::string origin = path.filename().string();
    // locate end-of-central-directory
    const std::string eocd_sig = "PK\x05\x06";
    const std::size_t scan_from = bytes.size() > (1 << 16) + 64 ? bytes.size() - (1 << 16) - 64 : 0;
    const auto eocd_at = bytes.rfind(eocd_sig);
    if (eocd_at == std::string::npos || eocd_at < scan_from)
        raise(Errc::CorruptFile, origin + ": not a zip archive (no central directory)");
    ByteReader er(bytes, origin);
    er.seek(eocd_at + 10);
    const auto entry_count = er.read<std::uint16_t>();
    er.skip(4);
    const auto cdir_offset = er.read<std::uint32_t>();

    std::map<std::string, NpyArray> out;
    ByteReader cr(bytes, origin);
    cr.seek(cdir_offset);
    for (std::uint16_t i = 0; i < entry_count; ++i) {
        if (cr.read<std::uint32_t>() != 0x02014b50) cr.fail("bad central directory entry");
        cr.skip(6);
        const auto method = cr.read<std::uint16_t>();
        cr.skip(8);
        const auto comp_size = cr.read<std::uint32_t>();
        cr.skip(4); // uncompressed size
        const auto name_len = cr.read<std::uint16_t>();
        const auto extra_len = cr.read<std::uint16_t>();
        const auto comment_len = cr.read<std::uint16_t>();
        cr.skip(8);
        const auto local_offset = cr.read<std::uint32_t>();
        const std::string name = cr.read_string(name_len);
        cr.skip(static_cast<std::size_t>(extra_len) + comment_len);

        ByteReader lr(bytes, origin);
        lr.seek(local_offset);
        if (lr.read<std::uint32_t>() != 0x04034b50) lr.fail("bad local header for " + name);
        lr.skip(22);
        const auto lname_len = lr.read<std::uint16_t>();
        const auto lextra_len = lr.read<std::uint16_t>();
        lr.skip(static_cast<std::size_t>(lname_len) + lextra_len);

        std::string payload;
        if (method == 0) {
            payload = lr.read_string(comp_size);
        } else if (method == 8) {
            payload = zlib_inflate(lr.raw(comp_size), comp_size, -15, origin);
        } else {
            raise(Errc::UnsupportedFormat, origin + ": zip compression method " +
                                               std::to_string(method) + " not supported");
        }
        std::string key = name;
        if (key.size() > 4 && key.substr(key.size() - 4) == ".npy") key.resize(key.size() - 4);
        out[key] = parse_npy(payload, origin + "/" + name);
    }
    if (out.empty()) raise(Errc::CorruptFile, origin + ": zip archive holds no arrays");
    return out;
}

void write_npz_file(const fs::path& path,
                    const std::vector<std::pair<std::string, NpyArray>>& arrays) {
    std::string out;
    struct CentralRecord {
        std::string name;
        std::uint32_t crc = 0;
        std::uint32_t size = 0;
        std::uint32_t offset = 0;
    };
    std::vector<CentralRecord> records;
    for (const auto& [key, arr] : arrays) {
        const std::string name = key + ".npy";
        const std::string payload = encode_npy(arr);
        CentralRecord rec;
        rec.name = name;
        rec.crc = static_cast<std::uint32_t>(
            crc32(0, reinterpret_cast<const Bytef*>(payload.data()),
                  static_cast<uInt>(payload.size())));
        rec.size = static_cast<std::uint32_t>(payload.size());
        rec.offset = static_cast<std::uint32_t>(out.size());
        records.push_back(rec);

        append_pod<std::uint32_t>(out, 0x04034b50);
        append_pod<std::uint16_t>(out, 20); // version needed
        append_pod<std::uint16_t>(out, 0);  // flags
        append_pod<std::uint16_t>(out, 0);  // stored
        append_pod<std::uint16_t>(out, 0);  // mod time
        append_pod<std::uint16_t>(out, 0);  // mod date
        append_pod<std::uint32_t>(out, rec.crc);
        append_pod<std::uint32_t>(out, rec.size);
        append_pod<std::uint32_t>(out, rec.size);
        append_pod<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        append_pod<std::uint16_t>(out, 0); // extra
        out += name;
        out += payload;
    }
    const auto cdir_start = static_cast<std::uint32_t>(out.size());
    for (const auto& rec : records) {
        append_pod<std::uint32_t>(out, 0x02014b50);
        append_pod<std::uint16_t>(out, 20);
        append_pod<std::uint16_t>(out, 20);
        append_pod<std::uint16_t>(out, 0);
        append_pod<std::uint16_t>(out, 0);
        append_pod<std::uint16_t>(out, 0);
        append_pod<std::uint16_t>(out, 0);
        append_pod<std::uint32_t>(out, rec.crc);
        append_pod<std::uint32_t>(out, rec.size);
        append_pod<std::uint32_t>(out, rec.size);
        append_pod<std::uint16_t>(out, static_cast<std::uint16_t>(rec.name.size()));
        append_pod<std::uint16_t>(out, 0);
        append_pod<std::uint16_t>(out, 0);
        append_pod<std::uint16_t>(out, 0);
        append_pod<std::uint16_t>(out, 0);
        append_pod<std::uint32_t>(out, 0);
        append_pod<std::uint32_t>(out, rec.offset);
        out += rec.name;
    }
    const auto cdir_size = static_cast<std::uint32_t>(out.size()) - cdir_start;
    append_pod<std::uint32_t>(out, 0x06054b50);
    append_pod<std::uint16_t>(out, 0);
    append_pod<std::uint16_t>(out, 0);
    append_pod<std::uint16_t>(out, static_cast<std::uint16_t>(records.size()));
    append_pod<std::uint16_t>(out, static_cast<std::uint16_t>(records.size()));
    append_pod<std::uint32_t>(out, cdir_size);
    append_pod<std::uint32_t>(out, cdir_start);
    append_pod<std::uint16_t>(out, 0);
    write_text_file(path, out);
}

// -------------------------------------------------------------------- CSV

bool parse_number(const std::string& cell, double& out) {
    const std::string t = trim(cell);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end && *end == '\0';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

bool timeish_name(const std::string& name) {
    const std::string n = to_lower(trim(name));
    return n == "time" || n == "timestamp" || n == "date" || n == "datetime" || n == "ds";
}

bool dateish_value(const std::string& v) {
    // 2021-04-01 or 2021-04-01T12:00:00 style
    const std::string t = trim(v);
    if (t.size() < 10) return false;
    return std::isdigit(static_cast<unsigned char>(t[0])) &&
           std::isdigit(static_cast<unsigned char>(t[1])) &&
           std::isdigit(static_cast<unsigned char>(t[2])) &&
           std::isdigit(static_cast<unsigned char>(t[3])) && t[4] == '-' && t[7] == '-';
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_raw(const fs::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::MissingDataset, "cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) raise(Errc::EmptyDataset, path.filename().string() + " is empty");
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            raise(Errc::CorruptFile, path.filename().string() + ": ragged row (" +
                                         std::to_string(cells.size()) + " cells, header has " +
                                         std::to_string(t.header.size()) + ")");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

std::vector<int> to_binary_labels(const std::vector<double>& raw, const std::string& origin) {
    std::vector<int> labels;
    labels.reserve(raw.size());
    for (double v : raw) {
        if (std::abs(v) < 1e-12) labels.push_back(0);
        else if (std::abs(v - 1.0) < 1e-12) labels.push_back(1);
        else raise(Errc::CorruptFile, origin + ": labels must be 0/1, found " + format_double(v));
    }
    return labels;
}

TabularData load_csv_tabular(const fs::path& path, ModalityEvidence* evidence) {
    const CsvTable t = read_csv_raw(path);
    const std::string origin = path.filename().string();
    if (t.rows.empty()) raise(Errc::EmptyDataset, origin + " has no data rows");

    std::size_t first_feature = 0;
    bool time_col = false;
    if (!t.header.empty()) {
        const bool name_hit = timeish_name(t.header[0]);
        bool value_hit = false;
        double ignored = 0.0;
        if (!parse_number(t.rows[0][0], ignored)) value_hit = dateish_value(t.rows[0][0]);
        if (name_hit || value_hit) {
            time_col = true;
            first_feature = 1;
        }
    }

    std::optional<std::size_t> label_col;
    if (t.header.size() > first_feature) {
        const std::string last = to_lower(trim(t.header.back()));
        if (last == "label" || last == "y" || last == "labels") label_col = t.header.size() - 1;
    }

    const std::size_t last_feature = label_col ? *label_col : t.header.size();
    if (last_feature <= first_feature && !label_col)
        raise(Errc::CorruptFile, origin + ": no feature columns");

    TabularData data;
    data.x.rows = t.rows.size();
    data.x.cols = last_feature - first_feature;
    data.x.values.reserve(data.x.rows * data.x.cols);
    std::vector<double> raw_labels;
    for (const auto& row : t.rows) {
        for (std::size_t c = first_feature; c < last_feature; ++c) {
            double v = 0.0;
            if (!parse_number(row[c], v))
                raise(Errc::CorruptFile,
                      origin + ": non-numeric cell '" + row[c] + "' in column " +
                          t.header[c]);
            data.x.values.push_back(v);
        }
        if (label_col) {
            double v = 0.0;
            if (!parse_number(row[*label_col], v))
                raise(Errc::CorruptFile, origin + ": non-numeric label '" + row[*label_col] + "'");
            raw_labels.push_back(v);
        }
    }
    if (label_col) data.labels = to_binary_labels(raw_labels, origin);
    data.column_names.assign(t.header.begin() + static_cast<std::ptrdiff_t>(first_feature),
                             t.header.begin() + static_cast<std::ptrdiff_t>(last_feature));

    if (evidence) {
        evidence->first_column_timeish = time_col;
        evidence->column_names = t.header;
        for (std::size_t i = 0; i < std::min<std::size_t>(4, t.rows.size()); ++i)
            evidence->sample_first_column.push_back(t.rows[i][0]);
    }
    return data;
}

// ------------------------------------------------------------ assembly

Matrix matrix_from_npy(const NpyArray& arr, const std::string& origin) {
    Matrix m;
    if (arr.shape.size() == 1) {
        m.rows = arr.shape[0];
        m.cols = 1;
    } else if (arr.shape.size() == 2) {
        m.rows = arr.shape[0];
        m.cols = arr.shape[1];
    } else {
        raise(Errc::UnsupportedFormat, origin + ": arrays with >2 dimensions are not supported");
    }
    m.values = arr.values;
    return m;
}

std::vector<std::pair<std::int64_t, std::int64_t>> edges_from_matrix(const Matrix& m,
                                                                     std::size_t n_nodes,
                                                                     const std::string& origin) {
    // Accepts 2 x m or m x 2.
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    auto push = [&](double a, double b) {
        const auto u = static_cast<std::int64_t>(a);
        const auto v = static_cast<std::int64_t>(b);
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_nodes ||
            static_cast<std::size_t>(v) >= n_nodes)
            raise(Errc::CorruptFile, origin + ": edge endpoint out of node range");
        edges.emplace_back(u, v);
    };
    if (m.rows == 2 && m.cols != 2) {
        for (std::size_t c = 0; c < m.cols; ++c) push(m.at(0, c), m.at(1, c));
    } else if (m.cols == 2) {
        for (std::size_t r = 0; r < m.rows; ++r) push(m.at(r, 0), m.at(r, 1));
    } else if (m.rows == 2 && m.cols == 2) {
        for (std::size_t c = 0; c < 2; ++c) push(m.at(0, c), m.at(1, c));
    } else {
        raise(Errc::CorruptFile, origin + ": edge_index must be 2 x m or m x 2");
    }
    return edges;
}

const Matrix* find_key(const std::map<std::string, Matrix>& vars,
                       std::initializer_list<const char*> names) {
    for (const char* n : names) {
        auto it = vars.find(n);
        if (it != vars.end()) return &it->second;
    }
    return nullptr;
}

Dataset assemble_container(std::map<std::string, Matrix> vars, DataFormat container,
                           const std::string& origin, ModalityEvidence* evidence) {
    Dataset ds;
    const Matrix* edge_index = find_key(vars, {"edge_index", "edges"});
    if (edge_index) {
        const Matrix* x = find_key(vars, {"x", "X", "features"});
        if (!x) raise(Errc::CorruptFile, origin + ": graph bundle lacks a node-feature matrix");
        if (x->rows == 0) raise(Errc::EmptyDataset, origin + ": graph has no nodes");
        GraphData g;
        g.node_features = *x;
        g.edges = edges_from_matrix(*edge_index, x->rows, origin);
        if (const Matrix* y = find_key(vars, {"y", "Y", "labels"})) {
            if (y->rows * y->cols != x->rows)
                raise(Errc::CorruptFile, origin + ": label count differs from node count");
            g.labels = to_binary_labels(y->values, origin);
        }
        ds.format = DataFormat::graph_bundle;
        ds.graph = std::move(g);
    } else {
        const Matrix* x = find_key(vars, {"X", "x", "data"});
        if (!x) raise(Errc::CorruptFile, origin + ": no X array found");
        if (x->rows == 0) raise(Errc::EmptyDataset, origin + ": X has zero rows");
        TabularData t;
        t.x = *x;
        if (const Matrix* y = find_key(vars, {"y", "Y", "labels"})) {
            if (y->rows * y->cols != x->rows)
                raise(Errc::CorruptFile, origin + ": label count differs from row count");
            t.labels = to_binary_labels(y->values, origin);
        }
        ds.format = container;
        ds.tabular = std::move(t);
    }
    if (evidence) {
        evidence->format = ds.format;
        evidence->has_edges = edge_index != nullptr;
    }
    return ds;
}

Matrix csv_numeric_matrix(const fs::path& path) {
    TabularData t = load_csv_tabular(path, nullptr);
    if (t.labels)
        raise(Errc::CorruptFile, path.filename().string() + ": unexpected label column");
    return t.x;
}

// test_label.csv: either a single unnamed numeric column or a column headed
// label/y
std::vector<int> csv_label_column(const fs::path& path) {
    TabularData t = load_csv_tabular(path, nullptr);
    if (t.labels && t.x.cols == 0) return *t.labels;
    if (!t.labels && t.x.cols == 1)
        return to_binary_labels(t.x.values, path.filename().string());
    raise(Errc::CorruptFile,
          path.filename().string() + ": expected exactly one 0/1 column");
}

Dataset load_ts_bundle(const fs::path& dir, ModalityEvidence* evidence) {
    const fs::path train_p = dir / "train.csv";
    const fs::path test_p = dir / "test.csv";
    const fs::path label_p = dir / "test_label.csv";
    for (const auto& p : {train_p, test_p, label_p})
        if (!fs::exists(p))
            raise(Errc::UnsupportedFormat,
                  dir.string() + " is not a time-series bundle (missing " +
                      p.filename().string() + ")");
    TimeSeriesData ts;
    ts.train = csv_numeric_matrix(train_p);
    ts.test = csv_numeric_matrix(test_p);
    if (ts.train.cols != ts.test.cols)
        raise(Errc::CorruptFile, dir.string() + ": train/test channel mismatch");
    ts.test_labels = csv_label_column(label_p);
    if (ts.test_labels.size() != ts.test.rows)
        raise(Errc::CorruptFile, dir.string() + ": test_label.csv must hold one 0/1 per test row");
    if (ts.train.rows == 0 || ts.test.rows == 0)
        raise(Errc::EmptyDataset, dir.string() + ": empty series");

    Dataset ds;
    ds.format = DataFormat::ts_bundle;
    ds.time_series = std::move(ts);
    if (evidence) evidence->format = DataFormat::ts_bundle;
    return ds;
}

} // namespace

Dataset load_dataset_file(const fs::path& path, ModalityEvidence* evidence) {
    if (!fs::exists(path)) raise(Errc::MissingDataset, path.string() + " does not exist");
    if (fs::is_directory(path)) return load_ts_bundle(path, evidence);

    const std::string ext = to_lower(path.extension().string());
    if (ext == ".mat") {
        return assemble_container(read_mat_file(path), DataFormat::mat,
                                  path.filename().string(), evidence);
    }
    if (ext == ".npz") {
        auto raw = read_npz_file(path);
        std::map<std::string, Matrix> vars;
        for (auto& [k, arr] : raw) vars[k] = matrix_from_npy(arr, path.filename().string());
        return assemble_container(std::move(vars), DataFormat::npz, path.filename().string(),
                                  evidence);
    }
    if (ext == ".csv") {
        Dataset ds;
        ds.format = DataFormat::csv;
        ds.tabular = load_csv_tabular(path, evidence);
        if (evidence) evidence->format = DataFormat::csv;
        if (ds.tabular->x.rows == 0 || ds.tabular->x.cols == 0)
            raise(Errc::EmptyDataset, path.string());
        return ds;
    }
    raise(Errc::UnsupportedFormat, path.string() + ": expected .mat, .csv, .npz or a bundle directory");
}

void write_mat_tabular(const fs::path& path, const Matrix& x,
                       const std::optional<std::vector<int>>& labels) {
    std::vector<std::pair<std::string, Matrix>> vars{{"X", x}};
    if (labels) {
        Matrix y;
        y.rows = labels->size();
        y.cols = 1;
        for (int v : *labels) y.values.push_back(static_cast<double>(v));
        vars.emplace_back("y", std::move(y));
    }
    write_mat_file(path, vars);
}

void write_mat_graph(const fs::path& path, const GraphData& graph) {
    std::vector<std::pair<std::string, Matrix>> vars{{"x", graph.node_features}};
    Matrix e;
    e.rows = 2;
    e.cols = graph.edges.size();
    e.values.resize(e.rows * e.cols);
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        e.at(0, i) = static_cast<double>(graph.edges[i].first);
        e.at(1, i) = static_cast<double>(graph.edges[i].second);
    }
    vars.emplace_back("edge_index", std::move(e));
    if (graph.labels) {
        Matrix y;
        y.rows = graph.labels->size();
        y.cols = 1;
        for (int v : *graph.labels) y.values.push_back(static_cast<double>(v));
        vars.emplace_back("y", std::move(y));
    }
    write_mat_file(path, vars);
}

void write_csv_tabular(const fs::path& path, const Matrix& x,
                       const std::optional<std::vector<int>>& labels,
                       const std::vector<std::string>& column_names) {
    std::ostringstream out;
    for (std::size_t c = 0; c < x.cols; ++c) {
        if (c) out << ",";
        out << (c < column_names.size() ? column_names[c] : "f" + std::to_string(c));
    }
    if (labels) out << (x.cols ? "," : "") << "label";
    out << "\n";
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < x.cols; ++c) {
            if (c) out << ",";
            out << format_double(x.at(r, c));
        }
        if (labels) {
            if (x.cols) out << ",";
            out << (*labels)[r];
        }
        out << "\n";
    }
    write_text_file(path, out.str());
}

namespace {

NpyArray npy_from_matrix(const Matrix& m, bool as_vector) {
    NpyArray arr;
    if (as_vector) arr.shape = {m.rows * m.cols};
    else arr.shape = {m.rows, m.cols};
    arr.values = m.values;
    return arr;
}

Matrix label_matrix(const std::vector<int>& labels) {
    Matrix y;
    y.rows = labels.size();
    y.cols = 1;
    for (int v : labels) y.values.push_back(static_cast<double>(v));
    return y;
}

} // namespace

void write_npz_tabular(const fs::path& path, const Matrix& x,
                       const std::optional<std::vector<int>>& labels) {
    std::vector<std::pair<std::string, NpyArray>> arrays{{"X", npy_from_matrix(x, false)}};
    if (labels) arrays.emplace_back("y", npy_from_matrix(label_matrix(*labels), true));
    write_npz_file(path, arrays);
}

void write_npz_graph(const fs::path& path, const GraphData& graph) {
    std::vector<std::pair<std::string, NpyArray>> arrays{
        {"x", npy_from_matrix(graph.node_features, false)}};
    Matrix e;
    e.rows = 2;
    e.cols = graph.edges.size();
    e.values.resize(e.rows * e.cols);
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        e.at(0, i) = static_cast<double>(graph.edges[i].first);
        e.at(1, i) = static_cast<double>(graph.edges[i].second);
    }
    arrays.emplace_back("edge_index", npy_from_matrix(e, false));
    if (graph.labels) arrays.emplace_back("y", npy_from_matrix(label_matrix(*graph.labels), true));
    write_npz_file(path, arrays);
}

void write_ts_bundle(const fs::path& dir, const TimeSeriesData& ts) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    write_csv_tabular(dir / "train.csv", ts.train, std::nullopt);
    write_csv_tabular(dir / "test.csv", ts.test, std::nullopt);
    Matrix empty;
    empty.rows = ts.test_labels.size();
    empty.cols = 0;
    write_csv_tabular(dir / "test_label.csv", empty, ts.test_labels);
}

void write_dataset_as(const fs::path& path, const Dataset& data) {
    switch (data.format) {
        case DataFormat::mat:
            write_mat_tabular(path, data.tabular->x, data.tabular->labels);
            return;
        case DataFormat::csv:
            write_csv_tabular(path, data.tabular->x, data.tabular->labels,
                              data.tabular->column_names);
            return;
        case DataFormat::npz:
            write_npz_tabular(path, data.tabular->x, data.tabular->labels);
            return;
        case DataFormat::graph_bundle:
            if (to_lower(path.extension().string()) == ".mat") write_mat_graph(path, *data.graph);
            else write_npz_graph(path, *data.graph);
            return;
        case DataFormat::ts_bundle:
            write_ts_bundle(path, *data.time_series);
            return;
    }
    raise(Errc::UnsupportedFormat, "unknown dataset format");
}

} // namespace adagent
