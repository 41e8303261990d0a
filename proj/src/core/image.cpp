// SPDX-License-Identifier: Apache-2.0
#include "editaudit/core/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cstring>

#include "editaudit/core/digest.hpp"

namespace editaudit {

namespace {

Image from_mat(const cv::Mat& m) {
  Image img;
  img.width = m.cols;
  img.height = m.rows;
  img.channels = m.channels();
  img.pixels.resize(static_cast<std::size_t>(m.cols) * m.rows * m.channels());
  const std::size_t row_bytes = static_cast<std::size_t>(m.cols) * m.channels();
  for (int y = 0; y < m.rows; ++y)
    std::memcpy(img.pixels.data() + y * row_bytes, m.ptr<std::uint8_t>(y), row_bytes);
  return img;
}

cv::Mat to_mat_bgr(const Image& image) {
  const int type = image.channels == 1 ? CV_8UC1 : CV_8UC3;
  cv::Mat m(image.height, image.width, type,
            const_cast<std::uint8_t*>(image.pixels.data()));
  if (image.channels == 3) {
    cv::Mat bgr;
    cv::cvtColor(m, bgr, cv::COLOR_RGB2BGR);
    return bgr;
  }
  return m.clone();
}

cv::Mat load(const std::filesystem::path& path, int flags) {
  if (!std::filesystem::exists(path)) throw ImageError("image not found: " + path.string());
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) throw ImageError("cannot decode image: " + path.string());
  if (m.depth() != CV_8U) throw ImageError("unsupported bit depth: " + path.string());
  return m;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  cv::Mat bgr = load(path, cv::IMREAD_COLOR);
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return from_mat(rgb);
}

Image read_gray(const std::filesystem::path& path) {
  return from_mat(load(path, cv::IMREAD_GRAYSCALE));
}

Dimensions image_dimensions(const std::filesystem::path& path) {
  cv::Mat m = load(path, cv::IMREAD_UNCHANGED);
  return {m.cols, m.rows};
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.channels != 1 && image.channels != 3)
    throw ImageError("only 1- or 3-channel images can be encoded");
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", to_mat_bgr(image), buf)) throw ImageError("png encoding failed");
  return buf;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  if (image.channels != 1 && image.channels != 3)
    throw ImageError("only 1- or 3-channel images can be written");
  if (!cv::imwrite(path.string(), to_mat_bgr(image)))
    throw ImageError("cannot write image: " + path.string());
}

Image crop(const Image& image, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > image.width || y + h > image.height)
    throw ImageError("crop rectangle outside image");
  Image out;
  out.width = w;
  out.height = h;
  out.channels = image.channels;
  out.pixels.resize(static_cast<std::size_t>(w) * h * image.channels);
  const std::size_t row = static_cast<std::size_t>(w) * image.channels;
  for (int r = 0; r < h; ++r) {
    const auto* src = image.pixels.data() +
                      (static_cast<std::size_t>(y + r) * image.width + x) * image.channels;
    std::memcpy(out.pixels.data() + r * row, src, row);
  }
  return out;
}

std::string image_digest(const Image& image) {
  std::string buf = std::to_string(image.width) + "x" + std::to_string(image.height) + "x" +
                    std::to_string(image.channels) + ":";
  buf.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return sha256_hex(buf);
}

}  // namespace editaudit
