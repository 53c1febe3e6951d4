#include "drwr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "drwr/errors.hpp"

namespace drwr {

namespace {

// Skips whitespace and '#' comment lines in a PGM header.
int next_pgm_token(std::istream& in) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      in.unget();
      return c;
    }
    c = in.get();
  }
  return EOF;
}

int read_pgm_int(std::istream& in) {
  if (next_pgm_token(in) == EOF) throw IoError("pgm: truncated header");
  int v = 0;
  if (!(in >> v)) throw IoError("pgm: bad header integer");
  return v;
}

MaskGrid load_pgm_gray(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || (m1 != '2' && m1 != '5'))
    throw IoError(path + ": not a P2/P5 PGM");
  const bool binary = m1 == '5';
  const int w = read_pgm_int(in);
  const int h = read_pgm_int(in);
  const int maxval = read_pgm_int(in);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
    throw IoError(path + ": bad PGM dimensions");

  MaskGrid g(w, h, uint8_t{0});
  if (binary) {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> row(static_cast<size_t>(w) * bytes);
    for (int y = 0; y < h; ++y) {
      in.read(reinterpret_cast<char*>(row.data()), row.size());
      if (!in) throw IoError(path + ": truncated PGM data");
      for (int x = 0; x < w; ++x) {
        int v = bytes == 2 ? (row[2 * x] << 8) | row[2 * x + 1] : row[x];
        if (bytes == 2) v >>= 8;  // compare in 8-bit range
        g(x, y) = v >= 128 ? 1 : 0;
      }
    }
  } else {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        int v = read_pgm_int(in);
        if (maxval > 255) v >>= 8;
        g(x, y) = v >= 128 ? 1 : 0;
      }
  }
  return g;
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

MaskGrid load_png_gray(const std::string& path) {
  PngReadCloser c;
  c.fp = std::fopen(path.c_str(), "rb");
  if (!c.fp) throw IoError("cannot open " + path);
  c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!c.png) throw IoError("png: init failed");
  c.info = png_create_info_struct(c.png);
  if (!c.info) throw IoError("png: init failed");
  if (setjmp(png_jmpbuf(c.png))) throw IoError(path + ": png decode error");

  png_init_io(c.png, c.fp);
  png_read_info(c.png, c.info);

  png_set_strip_16(c.png);
  png_set_strip_alpha(c.png);
  png_set_expand(c.png);
  const int color = png_get_color_type(c.png, c.info);
  if (color & PNG_COLOR_MASK_COLOR)
    png_set_rgb_to_gray(c.png, 1, -1.0, -1.0);
  png_read_update_info(c.png, c.info);

  const int w = static_cast<int>(png_get_image_width(c.png, c.info));
  const int h = static_cast<int>(png_get_image_height(c.png, c.info));
  std::vector<unsigned char> row(png_get_rowbytes(c.png, c.info));
  MaskGrid g(w, h, uint8_t{0});
  for (int y = 0; y < h; ++y) {
    png_read_row(c.png, row.data(), nullptr);
    for (int x = 0; x < w; ++x) g(x, y) = row[x] >= 128 ? 1 : 0;
  }
  return g;
}

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

}  // namespace

SilhouetteImage load_mask(const std::string& path) {
  MaskGrid g = has_suffix(path, ".png") ? load_png_gray(path) : load_pgm_gray(path);
  return SilhouetteImage(std::move(g));
}

void save_mask_pgm(const SilhouetteImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> row(img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) row[x] = img(x, y) ? 255 : 0;
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
}

void save_mask_png(const SilhouetteImage& img, const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError(path + ": png encode error");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) row[x] = img(x, y) ? 255 : 0;
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void save_field_pgm16(const FieldGrid& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << field.width() << " " << field.height() << "\n65535\n";
  // PGM 16-bit samples are big-endian.
  std::vector<unsigned char> row(static_cast<size_t>(field.width()) * 2);
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      const long v = std::lround(field(x, y) * 65535.0);
      const unsigned u = static_cast<unsigned>(std::clamp(v, 0L, 65535L));
      row[2 * x] = static_cast<unsigned char>(u >> 8);
      row[2 * x + 1] = static_cast<unsigned char>(u & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
}

void save_field_raw(const FieldGrid& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write("DRWRSMTH", 8);
  write_le<uint32_t>(out, static_cast<uint32_t>(field.width()));
  write_le<uint32_t>(out, static_cast<uint32_t>(field.height()));
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x)
      write_le<float>(out, static_cast<float>(field(x, y)));
}

FieldGrid load_field_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "DRWRSMTH", 8) != 0)
    throw IoError(path + ": bad magic");
  uint32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || w < 1 || h < 1) throw IoError(path + ": bad header");
  FieldGrid g(static_cast<int>(w), static_cast<int>(h), 0.0);
  for (uint32_t y = 0; y < h; ++y)
    for (uint32_t x = 0; x < w; ++x) {
      float v = 0.0f;
      in.read(reinterpret_cast<char*>(&v), 4);
      if (!in) throw IoError(path + ": truncated data");
      g(static_cast<int>(x), static_cast<int>(y)) = v;
    }
  return g;
}

}  // namespace drwr
