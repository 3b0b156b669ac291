#include "tsimg/alignment.hpp"

#include <algorithm>
#include <cmath>

#include "tsimg/error.hpp"

namespace tsimg {

namespace {

struct Tap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;
};

std::vector<Tap> taps(int in, int out) {
  std::vector<Tap> result(static_cast<std::size_t>(out));
  const double ratio = static_cast<double>(in) / out;
  for (int d = 0; d < out; ++d) {
    const double src = std::clamp((d + 0.5) * ratio - 0.5, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    result[d] = {lo, std::min(lo + 1, in - 1), src - lo};
  }
  return result;
}

}  // namespace

GrayImage AlignedImage::to_gray() const {
  return GrayImage(((channels[0] + channels[1] + channels[2]) / 3.0).eval());
}

bool ForecastMask::is_masked(int patch_index) const {
  return std::binary_search(masked_patch_indices.begin(), masked_patch_indices.end(), patch_index);
}

std::vector<bool> ForecastMask::flags() const {
  std::vector<bool> out(static_cast<std::size_t>(grid_rows * grid_cols), false);
  for (int i : masked_patch_indices) out[i] = true;
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_h, int out_w) {
  require(out_h >= 1 && out_w >= 1, ErrorCode::InvalidArgument, "resize target must be >= 1x1");
  require(img.height() >= 1 && img.width() >= 1, ErrorCode::InvalidArgument, "empty image");
  const auto row_taps = taps(img.height(), out_h);
  const auto col_taps = taps(img.width(), out_w);
  Matrix rows(out_h, img.width());
  for (int r = 0; r < out_h; ++r) {
    const Tap& t = row_taps[r];
    rows.row(r) = (1.0 - t.frac) * img.pixels.row(t.lo) + t.frac * img.pixels.row(t.hi);
  }
  Matrix out(out_h, out_w);
  for (int c = 0; c < out_w; ++c) {
    const Tap& t = col_taps[c];
    out.col(c) = (1.0 - t.frac) * rows.col(t.lo) + t.frac * rows.col(t.hi);
  }
  return GrayImage(std::move(out));
}

StandardizedImage standardize_image(const GrayImage& img) {
  StandardizedImage out;
  out.mean = img.pixels.mean();
  out.stddev = std::sqrt((img.pixels.array() - out.mean).square().mean());
  out.degenerate = !(out.stddev > 0.0);
  if (out.degenerate) {
    out.image = GrayImage(img.height(), img.width(), 0.0);
  } else {
    out.image = GrayImage(((img.pixels.array() - out.mean) / out.stddev).matrix());
  }
  return out;
}

AlignedImage replicate_channels(const GrayImage& img) {
  if (img.height() != img.width()) {
    fail(ErrorCode::NotSquare, "image is " + std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
  AlignedImage out;
  out.channels = {img.pixels, img.pixels, img.pixels};
  out.source_height = img.height();
  out.source_width = img.width();
  out.model_size = img.height();
  return out;
}

PatchSequence patchify(const AlignedImage& img, int P) {
  const int S = img.model_size;
  require(P >= 1, ErrorCode::InvalidArgument, "patch size must be >= 1");
  if (S % P != 0) {
    fail(ErrorCode::IndivisiblePatch,
         "image size " + std::to_string(S) + " not divisible by patch size " + std::to_string(P));
  }
  PatchSequence seq;
  seq.patch_size = P;
  seq.grid_rows = S / P;
  seq.grid_cols = S / P;
  seq.patches.resize(seq.grid_rows * seq.grid_cols, 3 * P * P);
  for (int gr = 0; gr < seq.grid_rows; ++gr) {
    for (int gc = 0; gc < seq.grid_cols; ++gc) {
      const int idx = gr * seq.grid_cols + gc;
      int k = 0;
      for (int ch = 0; ch < 3; ++ch) {
        for (int r = 0; r < P; ++r) {
          for (int c = 0; c < P; ++c) seq.patches(idx, k++) = img.channels[ch](gr * P + r, gc * P + c);
        }
      }
    }
  }
  return seq;
}

AlignedImage unpatchify(const PatchSequence& seq) {
  const int P = seq.patch_size;
  require(P >= 1 && seq.grid_rows >= 1 && seq.grid_cols >= 1, ErrorCode::ShapeMismatch, "empty patch grid");
  if (seq.grid_rows != seq.grid_cols || seq.count() != seq.grid_rows * seq.grid_cols ||
      seq.patch_dim() != 3 * P * P) {
    fail(ErrorCode::ShapeMismatch, "patch sequence inconsistent with its grid");
  }
  const int S = seq.grid_rows * P;
  AlignedImage img;
  img.model_size = S;
  img.source_height = S;
  img.source_width = S;
  for (auto& ch : img.channels) ch.resize(S, S);
  for (int gr = 0; gr < seq.grid_rows; ++gr) {
    for (int gc = 0; gc < seq.grid_cols; ++gc) {
      const int idx = gr * seq.grid_cols + gc;
      int k = 0;
      for (int ch = 0; ch < 3; ++ch) {
        for (int r = 0; r < P; ++r) {
          for (int c = 0; c < P; ++c) img.channels[ch](gr * P + r, gc * P + c) = seq.patches(idx, k++);
        }
      }
    }
  }
  return img;
}

ForecastMask build_forecast_mask(int L, int lookback_cols, int horizon_cols, int S, int P) {
  require(L >= 1, ErrorCode::InvalidL, "segment length must be >= 1");
  require(lookback_cols >= 1, ErrorCode::InvalidArgument, "lookback_cols must be >= 1");
  require(horizon_cols >= 1, ErrorCode::InvalidArgument, "horizon_cols must be >= 1");
  require(P >= 1, ErrorCode::InvalidArgument, "patch size must be >= 1");
  if (S % P != 0) fail(ErrorCode::IndivisiblePatch, "image size not divisible by patch size");
  ForecastMask mask;
  mask.grid_rows = S / P;
  mask.grid_cols = S / P;
  mask.boundary_col = static_cast<int>(
      std::lround(static_cast<double>(S) * lookback_cols / (lookback_cols + horizon_cols)));
  for (int gr = 0; gr < mask.grid_rows; ++gr) {
    for (int gc = 0; gc < mask.grid_cols; ++gc) {
      if ((gc + 1) * P > mask.boundary_col) mask.masked_patch_indices.push_back(gr * mask.grid_cols + gc);
    }
  }
  return mask;
}

AlignedInput align_image(const GrayImage& img, int image_size, int patch_size) {
  const GrayImage resized = resize_bilinear(img, image_size, image_size);
  StandardizedImage standardized = standardize_image(resized);
  AlignedInput out;
  out.mean = standardized.mean;
  out.stddev = standardized.stddev;
  out.degenerate = standardized.degenerate;
  AlignedImage aligned = replicate_channels(standardized.image);
  aligned.source_height = img.height();
  aligned.source_width = img.width();
  out.patches = patchify(aligned, patch_size);
  return out;
}

}  // namespace tsimg
