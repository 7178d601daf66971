#ifndef RDMD_SNAPSHOT_HPP
#define RDMD_SNAPSHOT_HPP

// Snapshot matrices: construction, channel stacking and persistence.
//
// A snapshot matrix holds one observable vector g(x_j) per column
// (column-major, snapshot-contiguous). Values are immutable once built.
//
// rdmd-binary layout (all little-endian):
//   bytes 0..3   magic "RDMD"
//   u32          version = 1
//   u64          n_features
//   u64          n_snapshots
//   f64[...]     n_features * n_snapshots values, column-major

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rdmd/error.hpp"
#include "rdmd/types.hpp"

namespace rdmd {

namespace detail {

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if constexpr (is_complex_v<typename Derived::Scalar>) {
                if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
            } else {
                if (!std::isfinite(m(i, j))) return false;
            }
    return true;
}

} // namespace detail

template <typename Scalar>
class BasicSnapshotMatrix {
public:
    using scalar_type = Scalar;
    using matrix_type = Mat<Scalar>;

    BasicSnapshotMatrix() = default;

    explicit BasicSnapshotMatrix(matrix_type data) : data_(std::move(data)) {
        detail::require(data_.rows() >= 1 && data_.cols() >= 1, ErrorCode::InvalidData,
                        "snapshot matrix must be at least 1x1");
        detail::require(detail::all_finite(data_), ErrorCode::InvalidData,
                        "snapshot matrix contains non-finite entries");
    }

    Index n_features() const noexcept { return data_.rows(); }
    Index n_snapshots() const noexcept { return data_.cols(); }
    bool empty() const noexcept { return data_.size() == 0; }

    const matrix_type& data() const noexcept { return data_; }
    auto col(Index j) const { return data_.col(j); }
    Scalar operator()(Index i, Index j) const { return data_(i, j); }

private:
    matrix_type data_;
};

using SnapshotMatrix = BasicSnapshotMatrix<double>;
using ComplexSnapshotMatrix = BasicSnapshotMatrix<cplx>;

/// Time-shifted pair: y column j is the successor of x column j.
template <typename Scalar>
struct BasicSnapshotPair {
    BasicSnapshotMatrix<Scalar> x;
    BasicSnapshotMatrix<Scalar> y;

    BasicSnapshotPair(BasicSnapshotMatrix<Scalar> x_, BasicSnapshotMatrix<Scalar> y_)
        : x(std::move(x_)), y(std::move(y_)) {
        detail::require(x.n_features() == y.n_features() && x.n_snapshots() == y.n_snapshots(),
                        ErrorCode::ShapeMismatch, "x and y must have identical dimensions");
    }

    Index n_features() const noexcept { return x.n_features(); }
    Index n_snapshots() const noexcept { return x.n_snapshots(); }
};

using SnapshotPair = BasicSnapshotPair<double>;
using ComplexSnapshotPair = BasicSnapshotPair<cplx>;

/// Splits an N x (M+1) trajectory into the pair (columns 0..M-1, columns 1..M).
template <typename Derived>
BasicSnapshotPair<typename Derived::Scalar> from_trajectory(const Eigen::MatrixBase<Derived>& series) {
    using S = typename Derived::Scalar;
    detail::require(series.cols() >= 2, ErrorCode::InsufficientSnapshots,
                    "trajectory needs at least 2 columns, got " + std::to_string(series.cols()));
    detail::require(series.rows() >= 1, ErrorCode::InvalidData, "trajectory has no rows");
    detail::require(detail::all_finite(series), ErrorCode::InvalidData,
                    "trajectory contains non-finite entries");
    const Index m = series.cols() - 1;
    return {BasicSnapshotMatrix<S>(series.leftCols(m)), BasicSnapshotMatrix<S>(series.rightCols(m))};
}

/// Concatenates channels row-wise, in input order.
template <typename Scalar>
BasicSnapshotMatrix<Scalar> stack_channels(std::span<const BasicSnapshotMatrix<Scalar>> channels) {
    detail::require(!channels.empty(), ErrorCode::InvalidParameter, "no channels to stack");
    const Index m = channels.front().n_snapshots();
    Index rows = 0;
    for (const auto& c : channels) {
        detail::require(c.n_snapshots() == m, ErrorCode::ShapeMismatch,
                        "channels disagree on snapshot count");
        rows += c.n_features();
    }
    Mat<Scalar> out(rows, m);
    Index offset = 0;
    for (const auto& c : channels) {
        out.middleRows(offset, c.n_features()) = c.data();
        offset += c.n_features();
    }
    return BasicSnapshotMatrix<Scalar>(std::move(out));
}

template <typename Scalar>
BasicSnapshotMatrix<Scalar> stack_channels(const std::vector<BasicSnapshotMatrix<Scalar>>& channels) {
    return stack_channels(std::span<const BasicSnapshotMatrix<Scalar>>(channels));
}

/// Reassembles a complex matrix from [real; imag] stacked rows.
inline ComplexSnapshotMatrix to_complex(const SnapshotMatrix& stacked) {
    detail::require(stacked.n_features() % 2 == 0, ErrorCode::ShapeMismatch,
                    "stacked real/imag matrix needs an even row count");
    const Index n = stacked.n_features() / 2;
    CMat out(n, stacked.n_snapshots());
    out.real() = stacked.data().topRows(n);
    out.imag() = stacked.data().bottomRows(n);
    return ComplexSnapshotMatrix(std::move(out));
}

inline ComplexSnapshotPair to_complex(const SnapshotPair& stacked) {
    return {to_complex(stacked.x), to_complex(stacked.y)};
}

/// Splits a complex matrix into [real; imag] stacked rows.
inline SnapshotMatrix to_stacked(const ComplexSnapshotMatrix& m) {
    RMat out(2 * m.n_features(), m.n_snapshots());
    out.topRows(m.n_features()) = m.data().real();
    out.bottomRows(m.n_features()) = m.data().imag();
    return SnapshotMatrix(std::move(out));
}

// ---------------------------------------------------------------------------
// Persistence

enum class FileFormat { csv, binary };

inline FileFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? FileFormat::csv : FileFormat::binary;
}

namespace detail {

inline constexpr std::array<char, 4> kMagic{'R', 'D', 'M', 'D'};
inline constexpr std::uint32_t kBinaryVersion = 1;
inline constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8;

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&v, bytes, sizeof(T));
    }
    return v;
}

template <typename T>
T from_little(T v) { return to_little(v); }

template <typename T>
void write_le(std::ostream& os, T v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) fail(ErrorCode::FormatError, "unexpected end of file in header");
    return from_little(v);
}

struct BinaryHeader {
    std::uint64_t n_features = 0;
    std::uint64_t n_snapshots = 0;
};

inline BinaryHeader read_binary_header(std::istream& is, std::uintmax_t file_size) {
    std::array<char, 4> magic{};
    is.read(magic.data(), 4);
    if (!is || magic != kMagic) fail(ErrorCode::FormatError, "bad magic bytes");
    const auto version = read_le<std::uint32_t>(is);
    if (version != kBinaryVersion)
        fail(ErrorCode::FormatError, "unsupported version " + std::to_string(version));
    BinaryHeader h;
    h.n_features = read_le<std::uint64_t>(is);
    h.n_snapshots = read_le<std::uint64_t>(is);
    if (h.n_features == 0 || h.n_snapshots == 0)
        fail(ErrorCode::FormatError, "header declares an empty matrix");
    constexpr auto max_values = std::numeric_limits<std::uint64_t>::max() / 8;
    if (h.n_features > max_values / h.n_snapshots)
        fail(ErrorCode::FormatError, "header dimensions overflow");
    const std::uint64_t expected = kHeaderBytes + 8 * h.n_features * h.n_snapshots;
    if (file_size != expected)
        fail(ErrorCode::FormatError, "payload size " + std::to_string(file_size) +
                                         " does not match header (expected " +
                                         std::to_string(expected) + ")");
    return h;
}

inline std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ifstream is(path, mode);
    if (!is) fail(ErrorCode::PathError, "cannot open " + path.string());
    return is;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view token) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
        fail(ErrorCode::FormatError, "malformed number '" + std::string(token) + "'");
    if (!std::isfinite(v)) fail(ErrorCode::InvalidData, "non-finite value in CSV");
    return v;
}

} // namespace detail

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline void save_binary(const RMat& m, const std::filesystem::path& path) {
    detail::require(detail::all_finite(m), ErrorCode::InvalidData, "refusing to save non-finite matrix");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) detail::fail(ErrorCode::PathError, "cannot write " + path.string());
    os.write(detail::kMagic.data(), 4);
    detail::write_le<std::uint32_t>(os, detail::kBinaryVersion);
    detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
    detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(m.data()),
                 static_cast<std::streamsize>(sizeof(double) * m.size()));
    } else {
        for (Index k = 0; k < m.size(); ++k) detail::write_le<double>(os, m.data()[k]);
    }
    if (!os) detail::fail(ErrorCode::PathError, "write failed for " + path.string());
}

inline RMat load_binary(const std::filesystem::path& path) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) detail::fail(ErrorCode::PathError, "cannot stat " + path.string());
    auto is = detail::open_input(path, std::ios::binary);
    const auto h = detail::read_binary_header(is, size);
    RMat m(static_cast<Index>(h.n_features), static_cast<Index>(h.n_snapshots));
    is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!is) detail::fail(ErrorCode::FormatError, "truncated payload");
    if constexpr (std::endian::native == std::endian::big)
        for (Index k = 0; k < m.size(); ++k) m.data()[k] = detail::from_little(m.data()[k]);
    return m;
}

inline void save_csv(const RMat& m, const std::filesystem::path& path) {
    detail::require(detail::all_finite(m), ErrorCode::InvalidData, "refusing to save non-finite matrix");
    std::ofstream os(path, std::ios::trunc);
    if (!os) detail::fail(ErrorCode::PathError, "cannot write " + path.string());
    std::string line;
    for (Index i = 0; i < m.rows(); ++i) {
        line.clear();
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) line += ',';
            line += format_double(m(i, j));
        }
        line += '\n';
        os << line;
    }
    if (!os) detail::fail(ErrorCode::PathError, "write failed for " + path.string());
}

inline RMat parse_csv(std::string_view text) {
    std::vector<double> values;
    Index cols = -1, rows = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = detail::trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;
        Index count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            values.push_back(detail::parse_double(line.substr(start, comma - start)));
            ++count;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (cols < 0) cols = count;
        else if (count != cols)
            detail::fail(ErrorCode::FormatError, "row " + std::to_string(rows) + " has " +
                                                     std::to_string(count) + " fields, expected " +
                                                     std::to_string(cols));
        ++rows;
    }
    detail::require(rows > 0, ErrorCode::FormatError, "CSV contains no data");
    RMat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    return m;
}

inline RMat load_csv(const std::filesystem::path& path) {
    auto is = detail::open_input(path, std::ios::in);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_csv(text);
}

inline SnapshotMatrix load(const std::filesystem::path& path, FileFormat format) {
    return SnapshotMatrix(format == FileFormat::csv ? load_csv(path) : load_binary(path));
}

inline SnapshotMatrix load(const std::filesystem::path& path) { return load(path, format_from_path(path)); }

inline void save(const SnapshotMatrix& m, const std::filesystem::path& path, FileFormat format) {
    if (format == FileFormat::csv) save_csv(m.data(), path);
    else save_binary(m.data(), path);
}

inline void save(const SnapshotMatrix& m, const std::filesystem::path& path) {
    save(m, path, format_from_path(path));
}

/// Column-at-a-time reader over an rdmd-binary file. Holds one column in
/// memory; used by the streaming projection.
class BinaryColumnReader {
public:
    explicit BinaryColumnReader(const std::filesystem::path& path)
        : is_(detail::open_input(path, std::ios::binary)) {
        std::error_code ec;
        const auto size = std::filesystem::file_size(path, ec);
        if (ec) detail::fail(ErrorCode::PathError, "cannot stat " + path.string());
        header_ = detail::read_binary_header(is_, size);
        column_.resize(static_cast<Index>(header_.n_features));
    }

    Index n_features() const noexcept { return static_cast<Index>(header_.n_features); }
    Index n_snapshots() const noexcept { return static_cast<Index>(header_.n_snapshots); }

    /// Reads column j; the returned view is valid until the next call.
    const RVec& column(Index j) {
        detail::require(j >= 0 && j < n_snapshots(), ErrorCode::InvalidParameter, "column out of range");
        const auto offset = static_cast<std::streamoff>(detail::kHeaderBytes) +
                            static_cast<std::streamoff>(8 * j) * n_features();
        is_.seekg(offset);
        is_.read(reinterpret_cast<char*>(column_.data()),
                 static_cast<std::streamsize>(sizeof(double) * column_.size()));
        if (!is_) detail::fail(ErrorCode::FormatError, "truncated payload");
        if constexpr (std::endian::native == std::endian::big)
            for (Index k = 0; k < column_.size(); ++k) column_[k] = detail::from_little(column_[k]);
        for (Index k = 0; k < column_.size(); ++k)
            if (!std::isfinite(column_[k])) detail::fail(ErrorCode::InvalidData, "non-finite value in file");
        return column_;
    }

private:
    std::ifstream is_;
    detail::BinaryHeader header_;
    RVec column_;
};

} // namespace rdmd

#endif
