#include "sgdg2/idx.hpp"

#include <fstream>
#include <iterator>
#include <string>

#include "sgdg2/error.hpp"

namespace sgdg2 {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

std::vector<std::uint32_t> read_header(std::span<const std::uint8_t> bytes, std::uint32_t magic,
                                       std::size_t dims) {
  if (bytes.size() < 4) throw Error(ErrorCode::truncated, "IDX header shorter than magic");
  const std::uint32_t found = read_be32(bytes, 0);
  if (found != magic) {
    throw Error(ErrorCode::format_error, "IDX magic " + std::to_string(found) + ", expected " +
                                             std::to_string(magic));
  }
  if (bytes.size() < 4 + 4 * dims) throw Error(ErrorCode::truncated, "IDX header truncated");
  std::vector<std::uint32_t> shape(dims);
  for (std::size_t i = 0; i < dims; ++i) shape[i] = read_be32(bytes, 4 + 4 * i);
  return shape;
}

void check_payload(std::span<const std::uint8_t> bytes, std::size_t header, std::uint64_t declared) {
  const std::uint64_t remaining = bytes.size() - header;
  if (remaining != declared) {
    throw Error(ErrorCode::truncated, "IDX payload has " + std::to_string(remaining) +
                                          " bytes, header declares " + std::to_string(declared));
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

FeatureMatrix parse_idx_images(std::span<const std::uint8_t> bytes) {
  const auto shape = read_header(bytes, kIdxImageMagic, 3);
  const std::uint64_t count = shape[0];
  const std::uint64_t pixels = std::uint64_t{shape[1]} * shape[2];
  constexpr std::size_t header = 16;
  check_payload(bytes, header, count * pixels);

  FeatureMatrix features(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  const std::uint8_t* payload = bytes.data() + header;
  for (std::uint64_t i = 0; i < count * pixels; ++i) {
    features.data()[i] = static_cast<double>(payload[i]) / 255.0;
  }
  return features;
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes, int class_count) {
  const auto shape = read_header(bytes, kIdxLabelMagic, 1);
  constexpr std::size_t header = 8;
  check_payload(bytes, header, shape[0]);
  std::vector<int> labels(shape[0]);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = bytes[header + i];
    if (labels[i] >= class_count) {
      throw Error(ErrorCode::format_error, "label " + std::to_string(labels[i]) +
                                               " outside [0.." +
                                               std::to_string(class_count - 1) + "]");
    }
  }
  return labels;
}

FeatureMatrix load_idx_images(const std::filesystem::path& path) {
  return parse_idx_images(read_file(path));
}

std::vector<int> load_idx_labels(const std::filesystem::path& path, int class_count) {
  return parse_idx_labels(read_file(path), class_count);
}

std::vector<std::uint8_t> encode_idx_images(std::uint32_t count, std::uint32_t rows,
                                            std::uint32_t cols,
                                            std::span<const std::uint8_t> pixels) {
  if (pixels.size() != std::size_t{count} * rows * cols) {
    throw Error(ErrorCode::dimension_mismatch, "pixel count does not match shape");
  }
  std::vector<std::uint8_t> out;
  out.reserve(16 + pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, count);
  write_be32(out, rows);
  write_be32(out, cols);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

}  // namespace sgdg2
