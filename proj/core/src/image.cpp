#include "puregaze/image.hpp"

#include <cmath>
#include <fstream>

#include "puregaze/common.hpp"

namespace puregaze {

void write_pnm(const std::filesystem::path& path, const ImageU8& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw IoError("write_pnm: unsupported channel count " + std::to_string(img.channels));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f << (img.channels == 3 ? "P6" : "P5") << "\n" << img.w << " " << img.h << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pix.data()), static_cast<std::streamsize>(img.pix.size()));
  if (!f) throw IoError("short write: " + path.string());
}

namespace {

int next_pnm_int(std::istream& in) {
  // Skips whitespace and '#' comments, as the format allows.
  int c = in.get();
  while (c == '#' || std::isspace(c)) {
    if (c == '#') {
      while (c != '\n' && c != EOF) c = in.get();
    }
    c = in.get();
  }
  int val = 0;
  bool any = false;
  while (std::isdigit(c)) {
    val = val * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw IoError("malformed PNM header");
  return val;
}

}  // namespace

ImageU8 read_pnm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path.string());
  char m0 = 0, m1 = 0;
  f.get(m0);
  f.get(m1);
  if (m0 != 'P' || (m1 != '5' && m1 != '6')) {
    throw IoError("not a binary PGM/PPM file: " + path.string());
  }
  ImageU8 img;
  img.channels = (m1 == '6') ? 3 : 1;
  img.w = next_pnm_int(f);
  img.h = next_pnm_int(f);
  const int maxval = next_pnm_int(f);
  if (maxval != 255) throw IoError("only 8-bit PNM supported: " + path.string());
  img.pix.resize(static_cast<std::size_t>(img.h) * img.w * img.channels);
  f.read(reinterpret_cast<char*>(img.pix.data()), static_cast<std::streamsize>(img.pix.size()));
  if (f.gcount() != static_cast<std::streamsize>(img.pix.size())) {
    throw IoError("truncated image data: " + path.string());
  }
  return img;
}

ImageU8 to_image_u8(const Tensor& batch, int index) {
  ImageU8 img;
  img.h = batch.h();
  img.w = batch.w();
  img.channels = batch.c();
  img.pix.resize(static_cast<std::size_t>(img.h) * img.w * img.channels);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        const double v = std::clamp(batch.at(index, c, y, x), 0.0, 1.0);
        img.at(y, x, c) = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return img;
}

void load_into_batch(const ImageU8& img, Tensor& batch, int index) {
  if (img.h != batch.h() || img.w != batch.w() || img.channels != batch.c()) {
    throw DomainError("image shape " + std::to_string(img.h) + "x" + std::to_string(img.w) + "x" +
                      std::to_string(img.channels) + " does not match batch " + batch.shape_str());
  }
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        batch.at(index, c, y, x) = img.at(y, x, c) / 255.0;
      }
    }
  }
}

double mean_intensity(const ImageU8& img) {
  if (img.pix.empty()) return 0.0;
  double sum = 0.0;
  for (std::uint8_t p : img.pix) sum += p;
  return sum / (255.0 * static_cast<double>(img.pix.size()));
}

}  // namespace puregaze
