#include "divprune/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include "divprune/errors.hpp"

namespace divprune {

namespace {

void check_finite(std::span<const double> data, std::size_t cols) {
    for (std::size_t k = 0; k < data.size(); ++k) {
        if (!std::isfinite(data[k])) {
            throw Error(ErrorKind::NonFiniteValue, "non-finite value at row " + std::to_string(k / cols) +
                                                       ", col " + std::to_string(k % cols));
        }
    }
}

template <typename UInt>
UInt read_le(const unsigned char* p) {
    UInt v = 0;
    for (std::size_t b = 0; b < sizeof(UInt); ++b) v |= static_cast<UInt>(p[b]) << (8 * b);
    return v;
}

template <typename UInt>
void write_le(std::string& out, UInt v) {
    for (std::size_t b = 0; b < sizeof(UInt); ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorKind::IoError, "read failed: " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

EmbeddingMatrix parse_binary(const std::string& bytes, const std::filesystem::path& path) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < EmbeddingFileHeader::kSize)
        throw Error(ErrorKind::MalformedHeader, "file shorter than header: " + path.string());
    if (std::memcmp(p, EmbeddingFileHeader::kMagic, 4) != 0)
        throw Error(ErrorKind::MalformedHeader, "bad magic in " + path.string());
    const auto version = read_le<std::uint16_t>(p + 4);
    if (version != EmbeddingFileHeader::kVersion)
        throw Error(ErrorKind::MalformedHeader, "unsupported version " + std::to_string(version));
    const std::uint8_t dtype = p[6];
    if (dtype > 1) throw Error(ErrorKind::MalformedHeader, "unknown dtype code " + std::to_string(dtype));
    const std::uint64_t rows = read_le<std::uint32_t>(p + 8);
    const std::uint64_t cols = read_le<std::uint32_t>(p + 12);
    if (cols == 0) throw Error(ErrorKind::DimensionError, "header declares zero columns");

    const std::uint64_t elem = dtype == 0 ? 4 : 8;
    const std::uint64_t payload = rows * cols * elem;
    if (payload != bytes.size() - EmbeddingFileHeader::kSize) {
        throw Error(ErrorKind::MalformedHeader, "payload is " +
                                                    std::to_string(bytes.size() - EmbeddingFileHeader::kSize) +
                                                    " bytes, header declares " + std::to_string(payload));
    }

    std::vector<double> data(rows * cols);
    const unsigned char* src = p + EmbeddingFileHeader::kSize;
    for (std::size_t k = 0; k < data.size(); ++k) {
        if (dtype == 0) {
            data[k] = std::bit_cast<float>(read_le<std::uint32_t>(src + 4 * k));
        } else {
            data[k] = std::bit_cast<double>(read_le<std::uint64_t>(src + 8 * k));
        }
    }
    return EmbeddingMatrix(rows, cols, std::move(data));
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

EmbeddingMatrix parse_csv(const std::string& text) {
    std::vector<double> data;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = trim(line);
        if (row.empty()) continue;
        std::size_t fields = 0;
        while (true) {
            const auto comma = row.find(',');
            const std::string_view field = trim(row.substr(0, comma));
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (field.empty() || ptr != field.data() + field.size()) {
                throw Error(ErrorKind::DimensionError,
                            "line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
            }
            // from_chars leaves `value` untouched on overflow/underflow; strtod saturates instead.
            if (ec == std::errc::result_out_of_range) value = std::strtod(std::string(field).c_str(), nullptr);
            if (!std::isfinite(value)) {
                throw Error(ErrorKind::NonFiniteValue,
                            "non-finite value at row " + std::to_string(rows) + ", col " + std::to_string(fields));
            }
            data.push_back(value);
            ++fields;
            if (comma == std::string_view::npos) break;
            row = row.substr(comma + 1);
        }
        if (rows == 0) {
            cols = fields;
        } else if (fields != cols) {
            throw Error(ErrorKind::DimensionError, "line " + std::to_string(line_no) + " has " +
                                                       std::to_string(fields) + " fields, expected " +
                                                       std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) throw Error(ErrorKind::DimensionError, "empty CSV: column count not derivable");
    return EmbeddingMatrix(rows, cols, std::move(data));
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    validate_embeddings(view());
}

EmbeddingMatrix EmbeddingMatrix::gather(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * cols_);
    for (const std::size_t i : indices) {
        if (i >= rows_) throw Error(ErrorKind::IndexOutOfRange, "row " + std::to_string(i));
        const auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return EmbeddingMatrix(indices.size(), cols_, std::move(out));
}

void validate_embeddings(const EmbeddingView& view) {
    if (view.cols == 0) throw Error(ErrorKind::DimensionError, "embedding dimension must be >= 1");
    if (view.data.size() != view.rows * view.cols) {
        throw Error(ErrorKind::DimensionError, "data length " + std::to_string(view.data.size()) +
                                                   " != rows*cols " + std::to_string(view.rows * view.cols));
    }
    check_finite(view.data, view.cols);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, FileFormat format) {
    if (format == FileFormat::automatic) {
        const auto ext = path.extension().string();
        if (ext == ".divp") {
            format = FileFormat::binary;
        } else if (ext == ".csv") {
            format = FileFormat::csv;
        } else {
            throw Error(ErrorKind::IoError, "cannot infer format from extension '" + ext + "'");
        }
    }
    const std::string bytes = read_file(path);
    return format == FileFormat::binary ? parse_binary(bytes, path) : parse_csv(bytes);
}

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path, StorageType dtype) {
    if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX)
        throw Error(ErrorKind::DimensionError, "matrix too large for .divp header");
    const std::size_t elem = dtype == StorageType::f32 ? 4 : 8;
    std::string out;
    out.reserve(EmbeddingFileHeader::kSize + m.data().size() * elem);
    out.append(EmbeddingFileHeader::kMagic, 4);
    write_le<std::uint16_t>(out, EmbeddingFileHeader::kVersion);
    out.push_back(static_cast<char>(dtype));
    out.push_back('\0');
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (const double v : m.data()) {
        if (dtype == StorageType::f32) {
            const auto narrowed = static_cast<float>(v);
            if (!std::isfinite(narrowed)) throw Error(ErrorKind::NonFiniteValue, "value overflows f32 storage");
            write_le(out, std::bit_cast<std::uint32_t>(narrowed));
        } else {
            write_le(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    write_file(path, out);
}

void save_embeddings_csv(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << m(i, j);
        }
        os << '\n';
    }
    write_file(path, os.str());
}

}  // namespace divprune
