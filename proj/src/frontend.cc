// src/frontend.cc

// Copyright 2026  The lipspot authors

// See ../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "lipspot/frontend.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace lipspot {
namespace frontend {

namespace {

constexpr float kBnEpsilon = 1e-5f;

nn::Mat<float> BilinearResize(const nn::Mat<float>& in, int out_h, int out_w) {
  const int in_h = static_cast<int>(in.rows());
  const int in_w = static_cast<int>(in.cols());
  const double scale_y = static_cast<double>(in_h) / out_h;
  const double scale_x = static_cast<double>(in_w) / out_w;
  nn::Mat<float> out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * scale_y - 0.5;
    fy = std::min(std::max(fy, 0.0), static_cast<double>(in_h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const float wy = static_cast<float>(fy - y0);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * scale_x - 0.5;
      fx = std::min(std::max(fx, 0.0), static_cast<double>(in_w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const float wx = static_cast<float>(fx - x0);
      const float top = (1.0f - wx) * in(y0, x0) + wx * in(y0, x1);
      const float bottom = (1.0f - wx) * in(y1, x0) + wx * in(y1, x1);
      out(y, x) = (1.0f - wy) * top + wy * bottom;
    }
  }
  return out;
}

// Unfolds a C x (h*w) channel-major map into (C*k*k) x (oh*ow) patches with
// zero spatial padding; patch rows are ordered channel, then dy, then dx,
// matching the convolution weight layout.
void Im2Col(const nn::Mat<float>& in, int h, int w, int kernel, int stride,
            int pad, nn::Mat<float>* patches, int* out_h, int* out_w) {
  const int channels = static_cast<int>(in.rows());
  const int oh = (h + 2 * pad - kernel) / stride + 1;
  const int ow = (w + 2 * pad - kernel) / stride + 1;
  patches->resize(channels * kernel * kernel, oh * ow);
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const int row = (c * kernel + ky) * kernel + kx;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            const bool inside = iy >= 0 && iy < h && ix >= 0 && ix < w;
            (*patches)(row, oy * ow + ox) =
                inside ? in(c, iy * w + ix) : 0.0f;
          }
        }
      }
    }
  }
  *out_h = oh;
  *out_w = ow;
}

void MaxPool3x3Stride2(const nn::Mat<float>& in, int h, int w,
                       nn::Mat<float>* out, int* out_h, int* out_w) {
  const int channels = static_cast<int>(in.rows());
  const int oh = (h + 2 - 3) / 2 + 1;
  const int ow = (w + 2 - 3) / 2 + 1;
  out->resize(channels, oh * ow);
  for (int c = 0; c < channels; ++c) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = oy * 2 + ky - 1;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = ox * 2 + kx - 1;
            if (ix < 0 || ix >= w) continue;
            best = std::max(best, in(c, iy * w + ix));
          }
        }
        (*out)(c, oy * ow + ox) = best;
      }
    }
  }
  *out_h = oh;
  *out_w = ow;
}

void WriteU32Le(std::ostream& out, uint32_t v) {
  unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xff),
                            static_cast<unsigned char>((v >> 8) & 0xff),
                            static_cast<unsigned char>((v >> 16) & 0xff),
                            static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

uint32_t ReadU32Le(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  return static_cast<uint32_t>(bytes[0]) |
         (static_cast<uint32_t>(bytes[1]) << 8) |
         (static_cast<uint32_t>(bytes[2]) << 16) |
         (static_cast<uint32_t>(bytes[3]) << 24);
}

void WriteF32Le(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  WriteU32Le(out, bits);
}

float ReadF32Le(std::istream& in) {
  uint32_t bits = ReadU32Le(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

FrameSequence Preprocess(const FrameSequence& raw, const CropSpec& spec,
                         Rng* rng) {
  if (raw.frames.empty())
    throw std::invalid_argument("preprocess needs at least one frame");
  const int box_w = spec.right - spec.left;
  const int box_h = spec.bottom - spec.top;
  if (box_w <= 0 || box_h <= 0)
    throw std::invalid_argument("crop coefficients define an empty box");
  if (spec.final_crop > spec.resize_to)
    throw std::invalid_argument("final crop larger than the resized frame");

  const int max_offset = spec.resize_to - spec.final_crop;
  int offset_y, offset_x;
  if (spec.mode == CropSpec::Mode::kTrainRandom) {
    if (rng == nullptr)
      throw std::invalid_argument("train-mode preprocessing needs a generator");
    // One offset per sequence, so the whole clip shifts rigidly.
    offset_y = static_cast<int>(rng->UniformInt(max_offset));
    offset_x = static_cast<int>(rng->UniformInt(max_offset));
  } else {
    offset_y = max_offset / 2;
    offset_x = max_offset / 2;
  }

  FrameSequence out;
  out.frame_rate = raw.frame_rate;
  out.frames.reserve(raw.frames.size());
  for (const nn::Mat<float>& frame : raw.frames) {
    if (frame.rows() < spec.bottom || frame.cols() < spec.right)
      throw std::invalid_argument(
          StrCat("frame of size ", frame.rows(), "x", frame.cols(),
                 " is smaller than the crop box"));
    nn::Mat<float> cropped = frame.block(spec.top, spec.left, box_h, box_w);
    nn::Mat<float> resized =
        BilinearResize(cropped, spec.resize_to, spec.resize_to);
    out.frames.push_back(
        resized.block(offset_y, offset_x, spec.final_crop, spec.final_crop));
  }
  return out;
}

SpatioTemporalResNet::SpatioTemporalResNet(const ResNetConfig& config)
    : config_(config) {
  if (config_.d_feat <= 0 || config_.base_channels <= 0)
    throw std::invalid_argument("network widths must be positive");
  if (config_.temporal_kernel % 2 != 1 || config_.temporal_kernel < 1)
    throw std::invalid_argument("temporal kernel must be odd");
  const int b = config_.base_channels;
  stem_w_.setZero(b, config_.temporal_kernel * 7 * 7);

  auto make_bn = [](BatchNorm* bn, int channels) {
    bn->gamma.setOnes(channels, 1);
    bn->beta.setZero(channels, 1);
    bn->mean.setZero(channels, 1);
    bn->var.setOnes(channels, 1);
  };
  auto make_conv = [](Conv* conv, int in_ch, int out_ch, int kernel,
                      int stride, int pad) {
    conv->in_ch = in_ch;
    conv->out_ch = out_ch;
    conv->kernel = kernel;
    conv->stride = stride;
    conv->pad = pad;
    conv->w.setZero(out_ch, in_ch * kernel * kernel);
  };
  make_bn(&stem_bn_, b);

  int flat_dim;
  if (config_.trunk_identity) {
    flat_dim = b * 28 * 28;
  } else {
    int in_ch = b;
    for (int s = 0; s < 4; ++s) {
      const int out_ch = b << s;
      const int stride = (s == 0) ? 1 : 2;
      std::vector<Block> blocks(2);
      make_bn(&blocks[0].bn1, in_ch);
      make_conv(&blocks[0].conv1, in_ch, out_ch, 3, stride, 1);
      make_bn(&blocks[0].bn2, out_ch);
      make_conv(&blocks[0].conv2, out_ch, out_ch, 3, 1, 1);
      if (in_ch != out_ch || stride != 1) {
        blocks[0].has_shortcut = true;
        make_conv(&blocks[0].shortcut, in_ch, out_ch, 1, stride, 0);
      }
      make_bn(&blocks[1].bn1, out_ch);
      make_conv(&blocks[1].conv1, out_ch, out_ch, 3, 1, 1);
      make_bn(&blocks[1].bn2, out_ch);
      make_conv(&blocks[1].conv2, out_ch, out_ch, 3, 1, 1);
      stages_.push_back(std::move(blocks));
      in_ch = out_ch;
    }
    make_bn(&final_bn_, b * 8);
    flat_dim = (b * 8) * 4 * 4;  // 28 -> 28 -> 14 -> 7 -> 4
  }
  fc_w_.setZero(config_.d_feat, flat_dim);
  fc_b_.setZero(config_.d_feat, 1);
}

void SpatioTemporalResNet::Register(const std::string& prefix,
                                    nn::ParamRegistry<float>* reg) {
  auto add_bn = [&](const std::string& name, BatchNorm* bn) {
    reg->AddState(name + ".gamma", &bn->gamma);
    reg->AddState(name + ".beta", &bn->beta);
    reg->AddState(name + ".mean", &bn->mean);
    reg->AddState(name + ".var", &bn->var);
  };
  reg->AddState(prefix + ".stem.conv.w", &stem_w_);
  add_bn(prefix + ".stem.bn", &stem_bn_);
  for (size_t s = 0; s < stages_.size(); ++s) {
    for (size_t k = 0; k < stages_[s].size(); ++k) {
      Block& block = stages_[s][k];
      const std::string base =
          StrCat(prefix, ".stage", s + 1, ".block", k + 1);
      add_bn(base + ".bn1", &block.bn1);
      reg->AddState(base + ".conv1.w", &block.conv1.w);
      add_bn(base + ".bn2", &block.bn2);
      reg->AddState(base + ".conv2.w", &block.conv2.w);
      if (block.has_shortcut)
        reg->AddState(base + ".shortcut.w", &block.shortcut.w);
    }
  }
  if (!config_.trunk_identity) add_bn(prefix + ".final_bn", &final_bn_);
  reg->AddState(prefix + ".fc.w", &fc_w_);
  reg->AddState(prefix + ".fc.b", &fc_b_);
}

void SpatioTemporalResNet::InitRandom(Rng* rng) {
  auto he_fill = [&](nn::Mat<float>* m, int fan_in) {
    const float stddev = std::sqrt(2.0f / static_cast<float>(fan_in));
    for (int r = 0; r < m->rows(); ++r)
      for (int c = 0; c < m->cols(); ++c)
        (*m)(r, c) = stddev * static_cast<float>(rng->Normal());
  };
  he_fill(&stem_w_, static_cast<int>(stem_w_.cols()));
  for (std::vector<Block>& blocks : stages_) {
    for (Block& block : blocks) {
      he_fill(&block.conv1.w, static_cast<int>(block.conv1.w.cols()));
      he_fill(&block.conv2.w, static_cast<int>(block.conv2.w.cols()));
      if (block.has_shortcut)
        he_fill(&block.shortcut.w, static_cast<int>(block.shortcut.w.cols()));
    }
  }
  he_fill(&fc_w_, static_cast<int>(fc_w_.cols()));
  fc_b_.setZero();
}

namespace {

// In-place inference batch normalization over channel rows, optionally
// followed by a rectifier.
void BnRelu(nn::Mat<float>* map, const nn::Mat<float>& gamma,
            const nn::Mat<float>& beta, const nn::Mat<float>& mean,
            const nn::Mat<float>& var, bool relu) {
  for (int c = 0; c < map->rows(); ++c) {
    const float inv_std = 1.0f / std::sqrt(var(c, 0) + kBnEpsilon);
    const float scale = gamma(c, 0) * inv_std;
    const float shift = beta(c, 0) - mean(c, 0) * scale;
    map->row(c) = (map->row(c).array() * scale + shift).matrix();
  }
  if (relu) *map = map->cwiseMax(0.0f);
}

}  // namespace

void SpatioTemporalResNet::RunTrunk(nn::Mat<float>* map, int* h,
                                    int* w) const {
  auto conv = [&](const Conv& c, const nn::Mat<float>& in, int* ch,
                  int* cw) -> nn::Mat<float> {
    nn::Mat<float> patches;
    Im2Col(in, *ch, *cw, c.kernel, c.stride, c.pad, &patches, ch, cw);
    return c.w * patches;
  };
  for (const std::vector<Block>& blocks : stages_) {
    for (const Block& block : blocks) {
      nn::Mat<float> act = *map;
      BnRelu(&act, block.bn1.gamma, block.bn1.beta, block.bn1.mean,
             block.bn1.var, true);
      int bh = *h, bw = *w;
      nn::Mat<float> y = conv(block.conv1, act, &bh, &bw);
      BnRelu(&y, block.bn2.gamma, block.bn2.beta, block.bn2.mean,
             block.bn2.var, true);
      nn::Mat<float> residual = conv(block.conv2, y, &bh, &bw);
      if (block.has_shortcut) {
        int sh = *h, sw = *w;
        *map = conv(block.shortcut, act, &sh, &sw) + residual;
      } else {
        *map += residual;
      }
      *h = bh;
      *w = bw;
    }
  }
  BnRelu(map, final_bn_.gamma, final_bn_.beta, final_bn_.mean, final_bn_.var,
         true);
}

FeatureSequence SpatioTemporalResNet::ExtractFeatures(
    const FrameSequence& frames) const {
  const int num_frames = static_cast<int>(frames.frames.size());
  if (num_frames == 0)
    throw std::invalid_argument("feature extraction needs at least one frame");
  const int side = 112;
  for (const nn::Mat<float>& f : frames.frames) {
    if (f.rows() != side || f.cols() != side)
      throw std::invalid_argument(
          StrCat("expected ", side, "x", side, " frames, got ", f.rows(), "x",
                 f.cols()));
  }
  const int tk = config_.temporal_kernel;
  const int reach = tk / 2;

  FeatureSequence out;
  out.features.resize(num_frames, config_.d_feat);

  nn::Mat<float> slices(tk, side * side);
  nn::Mat<float> patches;
  for (int t = 0; t < num_frames; ++t) {
    // Temporal edge padding by frame replication keeps the row count at T.
    for (int dt = 0; dt < tk; ++dt) {
      int src = std::min(std::max(t + dt - reach, 0), num_frames - 1);
      const nn::Mat<float>& f = frames.frames[src];
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) slices(dt, y * side + x) = f(y, x);
    }
    int h = side, w = side;
    Im2Col(slices, h, w, 7, 2, 3, &patches, &h, &w);
    nn::Mat<float> map = stem_w_ * patches;
    BnRelu(&map, stem_bn_.gamma, stem_bn_.beta, stem_bn_.mean, stem_bn_.var,
           true);
    nn::Mat<float> pooled;
    MaxPool3x3Stride2(map, h, w, &pooled, &h, &w);
    map = std::move(pooled);
    if (!config_.trunk_identity) RunTrunk(&map, &h, &w);

    nn::Mat<float> flat(map.rows() * map.cols(), 1);
    for (int c = 0; c < map.rows(); ++c)
      for (int p = 0; p < map.cols(); ++p)
        flat(c * map.cols() + p, 0) = map(c, p);
    nn::Mat<float> y = fc_w_ * flat + fc_b_;
    for (int d = 0; d < config_.d_feat; ++d) out.features(t, d) = y(d, 0);
  }
  return out;
}

void WriteFeatureFile(const std::string& path,
                      const nn::Mat<float>& features) {
  if (features.rows() < 1 || features.cols() < 1)
    throw std::invalid_argument("feature matrix must be non-empty");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(StrCat("cannot open '", path, "' for writing"));
  out.write("LSPF", 4);
  WriteU32Le(out, 1);
  WriteU32Le(out, static_cast<uint32_t>(features.rows()));
  WriteU32Le(out, static_cast<uint32_t>(features.cols()));
  for (int r = 0; r < features.rows(); ++r)
    for (int c = 0; c < features.cols(); ++c) WriteF32Le(out, features(r, c));
  if (!out) throw IoError(StrCat("short write to '", path, "'"));
}

nn::Mat<float> ReadFeatureFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(StrCat("cannot open '", path, "'"));
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "LSPF")
    throw DataError(StrCat("'", path, "' is not a feature file"));
  const uint32_t version = ReadU32Le(in);
  if (version != 1)
    throw DataError(StrCat("unsupported feature file version ", version));
  const uint32_t rows = ReadU32Le(in);
  const uint32_t cols = ReadU32Le(in);
  if (!in || rows < 1 || cols < 1)
    throw DataError(StrCat("'", path, "' declares an empty feature matrix"));
  nn::Mat<float> features(rows, cols);
  for (uint32_t r = 0; r < rows; ++r)
    for (uint32_t c = 0; c < cols; ++c) features(r, c) = ReadF32Le(in);
  if (!in) throw DataError(StrCat("'", path, "' is truncated"));
  return features;
}

nn::Mat<float> LoadPrecomputed(const std::string& path, int expected_rows,
                               int expected_cols) {
  nn::Mat<float> features = ReadFeatureFile(path);
  if (features.rows() != expected_rows || features.cols() != expected_cols)
    throw DataError(StrCat("'", path, "' holds a ", features.rows(), "x",
                           features.cols(), " matrix, expected ",
                           expected_rows, "x", expected_cols));
  return features;
}

}  // namespace frontend
}  // namespace lipspot
