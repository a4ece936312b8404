#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sgdg2 {

/// One sample per row, pixel intensities in [0, 1].
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// IDX layout: big-endian u32 magic, big-endian u32 dimensions, then the
// unsigned byte payload. Images are (count, rows, cols), labels (count).

FeatureMatrix parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes, int class_count = 10);

FeatureMatrix load_idx_images(const std::filesystem::path& path);
std::vector<int> load_idx_labels(const std::filesystem::path& path, int class_count = 10);

std::vector<std::uint8_t> encode_idx_images(std::uint32_t count, std::uint32_t rows,
                                            std::uint32_t cols,
                                            std::span<const std::uint8_t> pixels);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

}  // namespace sgdg2
