#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace divprune {

/// Non-owning row-major view over M token vectors of dimension d.
struct EmbeddingView {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::span<const double> data;

    std::span<const double> row(std::size_t i) const { return data.subspan(i * cols, cols); }
};

/**
 * @brief Owned M x d matrix of token embeddings, one token vector per row.
 *
 * Shape is fixed at construction. Construction validates that the payload
 * length matches rows * cols and that every value is finite.
 */
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    EmbeddingView view() const noexcept { return {rows_, cols_, data_}; }
    operator EmbeddingView() const noexcept { return view(); }

    /// Rows at `indices`, in the order given.
    EmbeddingMatrix gather(std::span<const std::size_t> indices) const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Throws DimensionError / NonFiniteValue if the view is not a valid embedding matrix.
void validate_embeddings(const EmbeddingView& view);

enum class FileFormat { binary, csv, automatic };
enum class StorageType : std::uint8_t { f32 = 0, f64 = 1 };

/// Fixed 16-byte little-endian header of a .divp file.
struct EmbeddingFileHeader {
    static constexpr char kMagic[4] = {'D', 'I', 'V', 'P'};
    static constexpr std::uint16_t kVersion = 1;
    static constexpr std::size_t kSize = 16;

    std::uint16_t version = kVersion;
    StorageType dtype = StorageType::f64;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
};

EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                FileFormat format = FileFormat::automatic);

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path,
                     StorageType dtype = StorageType::f64);

/// Headerless comma-separated text, one row per line, 17 significant digits.
void save_embeddings_csv(const EmbeddingMatrix& m, const std::filesystem::path& path);

}  // namespace divprune
