#include "fishid/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "fishid/error.hpp"
#include "fishid/rng.hpp"

namespace fishid {

namespace {

constexpr const char* kStage = "synthgen";
constexpr double kBorderMargin = 6.0;  // keeps every fish pixel >= 5 px from the border
constexpr Rgb kEyeColor{12, 12, 12};
// Blunt snout: the body ellipse is cut at this fraction of its half length.
constexpr double kNoseCut = 0.82;
constexpr double kBackShade = 0.3;

ColorRange around(Rgb c, int spread) {
  const auto lo = [&](std::uint8_t v) { return std::uint8_t(std::max(0, int(v) - spread)); };
  const auto hi = [&](std::uint8_t v) { return std::uint8_t(std::min(255, int(v) + spread)); };
  return {{lo(c.r), lo(c.g), lo(c.b)}, {hi(c.r), hi(c.g), hi(c.b)}};
}

Rgb sample_color(Rng& rng, const ColorRange& range) {
  return {std::uint8_t(rng.uniform_int(range.lo.r, range.hi.r)), std::uint8_t(rng.uniform_int(range.lo.g, range.hi.g)),
          std::uint8_t(rng.uniform_int(range.lo.b, range.hi.b))};
}

struct Vec {
  double x = 0, y = 0;
};

double edge(Vec a, Vec b, Vec p) { return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x); }

bool in_triangle(Vec a, Vec b, Vec c, Vec p) {
  const double d1 = edge(a, b, p), d2 = edge(b, c, p), d3 = edge(c, a, p);
  const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(has_neg && has_pos);
}

class Canvas {
 public:
  Canvas(int w, int h, Rgb background) : img_(w, h, background), drawn_(img_.size(), 0) {}

  template <typename Inside, typename Shade>
  void fill(double x0, double y0, double x1, double y1, Inside inside, Shade shade) {
    const int xa = std::max(0, int(std::floor(x0)) - 1), xb = std::min(img_.width - 1, int(std::ceil(x1)) + 1);
    const int ya = std::max(0, int(std::floor(y0)) - 1), yb = std::min(img_.height - 1, int(std::ceil(y1)) + 1);
    for (int y = ya; y <= yb; ++y) {
      for (int x = xa; x <= xb; ++x) {
        const Vec p{x + 0.5, y + 0.5};
        if (!inside(p)) continue;
        img_.at(x, y) = shade(p);
        drawn_[std::size_t(y) * std::size_t(img_.width) + std::size_t(x)] = 1;
      }
    }
  }

  void add_noise(Rng& rng, int amplitude) {
    if (amplitude <= 0) return;
    const auto jitter = [&](std::uint8_t v) {
      return std::uint8_t(std::clamp(int(v) + rng.uniform_int(-amplitude, amplitude), 0, 255));
    };
    for (std::size_t i = 0; i < img_.size(); ++i) {
      if (!drawn_[i]) continue;
      Rgb& p = img_.pixels[i];
      p = {jitter(p.r), jitter(p.g), jitter(p.b)};
    }
  }

  RgbImage take() { return std::move(img_); }

 private:
  RgbImage img_;
  std::vector<std::uint8_t> drawn_;
};

// Darkens toward the back line; depth is 0 at the body axis, 1 at the top.
Rgb shaded(Rgb c, double depth) {
  const double k = 1.0 - kBackShade * std::clamp(depth, 0.0, 1.0);
  const auto ch = [k](std::uint8_t v) { return std::uint8_t(std::lround(v * k)); };
  return {ch(c.r), ch(c.g), ch(c.b)};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<FamilySpec> default_families() {
  // Aspect bands do not overlap between neighbours. The dorsum/ventral pairs
  // are spread over the RGB cube, away from the blue background, with the
  // dorsum always darker than the belly.
  return {
      {"Istiophoridae", "billfish", false, {2.75, 2.95}, around({255, 0, 255}, 10), around({0, 255, 255}, 10),
       {0.18, 0.21}, {0.45, 0.55}, false},
      {"leiognathidae", "ponyfish", false, {1.45, 1.55}, around({0, 96, 96}, 10), around({255, 96, 255}, 10),
       {0.13, 0.16}, {0.15, 0.20}, false},
      {"Acropomaatidae", "lanternbelly", false, {2.1, 2.25}, around({0, 160, 0}, 10), around({0, 255, 255}, 10),
       {0.15, 0.18}, {0.25, 0.30}, false},
      {"Scombridae", "mackerel", false, {2.3, 2.45}, around({0, 255, 0}, 10), around({255, 255, 0}, 10),
       {0.14, 0.17}, {0.20, 0.25}, false},
      {"Stromateidae", "butterfish", false, {1.2, 1.3}, around({160, 0, 0}, 10), around({0, 255, 0}, 10),
       {0.10, 0.13}, {0.10, 0.15}, false},
      {"Triacanthidae", "triplespine", false, {1.85, 1.98}, around({255, 0, 160}, 10), around({255, 160, 0}, 10),
       {0.12, 0.15}, {0.35, 0.40}, false},
      {"Poison fish", "poison", true, {1.65, 1.75}, around({255, 0, 0}, 10), around({255, 255, 255}, 10),
       {0.12, 0.15}, {0.25, 0.32}, true},
  };
}

SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.train_counts = {15, 10, 15, 10, 15, 10, 25};
  cfg.test_counts = {10, 10, 10, 10, 10, 10, 25};
  return cfg;
}

RenderedFish render_fish_detailed(const FamilySpec& spec, std::uint64_t seed, const SynthConfig& cfg) {
  if (cfg.width < 64 || cfg.height < 64) throw Error(ErrorKind::CanvasTooSmall, kStage, "canvas must be at least 64x64");
  if (!(cfg.scale > 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "scale must be > 0");
  if (!(spec.aspect.lo > 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "aspect must be > 0");

  Rng rng(seed);
  const double s = cfg.scale;
  const double aspect = rng.uniform(spec.aspect.lo, spec.aspect.hi);
  const double tail_frac = rng.uniform(spec.tail_length.lo, spec.tail_length.hi);
  const double fin_frac = rng.uniform(spec.fin_height.lo, spec.fin_height.hi);
  // Half body length: a random share of the largest fish that fits the
  // unscaled canvas, so every family is drawn at a similar resolution.
  const double ref_w = cfg.width / s - 2.0 * kBorderMargin, ref_h = cfg.height / s - 2.0 * kBorderMargin;
  const double a_max = std::min(ref_w / (2.0 * (1.0 + tail_frac)), ref_h * aspect / (2.0 * (1.0 + 2.0 * fin_frac)));
  const double a = rng.uniform(0.86, 0.95) * a_max * s;
  const double b = a / aspect;
  const double tail = tail_frac * 2.0 * a;
  const double fin = fin_frac * 2.0 * b;
  const bool head_right = (rng.next() >> 63) != 0;
  const double dir = head_right ? 1.0 : -1.0;
  const Rgb dorsum = sample_color(rng, spec.dorsum);
  const Rgb ventral = sample_color(rng, spec.ventral);

  const double back_extent = a + tail;
  const double left_extent = head_right ? back_extent : a;
  const double right_extent = head_right ? a : back_extent;
  // Placement is drawn in whole pixels of the unscaled canvas, so a scaled
  // render puts the body axis on the same pixel boundary.
  const double cx_lo = std::ceil((kBorderMargin + left_extent) / s);
  const double cx_hi = std::floor((cfg.width - kBorderMargin - right_extent) / s);
  const double cy_lo = std::ceil((kBorderMargin + b + fin) / s);
  const double cy_hi = std::floor((cfg.height - kBorderMargin - b - fin) / s);
  if (cx_lo > cx_hi || cy_lo > cy_hi) throw Error(ErrorKind::CanvasTooSmall, kStage, "fish does not fit on the canvas");
  const double cx = s * (cx_lo + double(rng.below(std::uint64_t(cx_hi - cx_lo) + 1)));
  const double cy = s * (cy_lo + rng.uniform01() * (cy_hi - cy_lo));

  // Along-body offset t (positive toward the head) to canvas x.
  const auto at = [&](double t, double v) { return Vec{cx + dir * t, cy + v}; };
  Canvas canvas(cfg.width, cfg.height, cfg.background);
  const auto flat = [](Rgb c) { return [c](Vec) { return c; }; };

  const Vec t_apex = at(-0.8 * a, 0), t_top = at(-back_extent, -0.75 * b), t_bottom = at(-back_extent, 0.75 * b);
  canvas.fill(std::min(t_apex.x, t_top.x), t_top.y, std::max(t_apex.x, t_top.x), t_bottom.y,
              [&](Vec p) { return in_triangle(t_apex, t_top, t_bottom, p); }, flat(dorsum));

  // The fin tip is cut flat so its top edge stays stable under resampling.
  const double fin_top = cy - b - 0.85 * fin;
  const Vec f_rear = at(-0.35 * a, -0.85 * b), f_front = at(0.15 * a, -0.85 * b), f_apex = at(-0.25 * a, -b - fin);
  canvas.fill(std::min(f_rear.x, f_front.x), f_apex.y, std::max(f_rear.x, f_front.x), f_rear.y,
              [&](Vec p) { return in_triangle(f_rear, f_front, f_apex, p) && p.y >= fin_top; }, flat(dorsum));
  // Anal fin: the dorsal fin mirrored below the body, which keeps the
  // silhouette's principal axis horizontal.
  const double anal_bottom = cy + b + 0.85 * fin;
  const Vec a_rear = at(-0.35 * a, 0.85 * b), a_front = at(0.15 * a, 0.85 * b), a_apex = at(-0.25 * a, b + fin);
  canvas.fill(std::min(a_rear.x, a_front.x), a_rear.y, std::max(a_rear.x, a_front.x), a_apex.y,
              [&](Vec p) { return in_triangle(a_rear, a_front, a_apex, p) && p.y <= anal_bottom; }, flat(ventral));

  canvas.fill(
      cx - a, cy - b, cx + a, cy + b,
      [&](Vec p) {
        const double u = (p.x - cx) / a, v = (p.y - cy) / b;
        return u * u + v * v <= 1.0 && u * dir <= kNoseCut;
      },
      [&](Vec p) { return p.y < cy ? shaded(dorsum, (cy - p.y) / b) : ventral; });

  const Vec eye = at(0.7 * a, -0.3 * b);
  const double eye_r = 3.0 * s;
  if (spec.spot_pattern) {
    const double spot_r = 2.5 * s;
    for (int i = 0; i < 6; ++i) {
      const Vec c = at(rng.uniform(-0.55, 0.3) * a, rng.uniform(-0.5, 0.5) * b);
      const Rgb color{std::uint8_t(rng.uniform_int(40, 60)), std::uint8_t(rng.uniform_int(20, 30)),
                      std::uint8_t(rng.uniform_int(15, 25))};
      canvas.fill(c.x - spot_r, c.y - spot_r, c.x + spot_r, c.y + spot_r,
                  [&](Vec p) { return std::hypot(p.x - c.x, p.y - c.y) <= spot_r; }, flat(color));
    }
  }
  canvas.fill(eye.x - eye_r, eye.y - eye_r, eye.x + eye_r, eye.y + eye_r,
              [&](Vec p) { return std::hypot(p.x - eye.x, p.y - eye.y) <= eye_r; }, flat(kEyeColor));

  canvas.add_noise(rng, cfg.noise);
  return {canvas.take(), head_right};
}

RgbImage render_fish(const FamilySpec& spec, std::uint64_t seed, const SynthConfig& cfg) {
  return render_fish_detailed(spec, seed, cfg).image;
}

std::uint64_t image_seed(std::uint64_t corpus_seed, std::size_t family, Split split, int k) {
  std::uint64_t h = splitmix64(corpus_seed);
  h = splitmix64(h ^ std::uint64_t(family));
  h = splitmix64(h ^ (split == Split::Train ? 0x7472ULL : 0x7465ULL));
  return splitmix64(h ^ std::uint64_t(k));
}

std::string file_stem(std::string_view family) {
  std::string out(family);
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

Corpus generate_corpus(const SynthConfig& cfg, std::span<const FamilySpec> specs, const std::filesystem::path& out_dir) {
  if (cfg.train_counts.size() != specs.size() || cfg.test_counts.size() != specs.size()) {
    throw Error(ErrorKind::InvalidArgument, kStage, "need one train and one test count per family");
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (cfg.train_counts[i] < 0 || cfg.test_counts[i] < 0) {
      throw Error(ErrorKind::InvalidArgument, kStage, "image counts must be >= 0");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, kStage, "cannot create " + out_dir.string() + ": " + ec.message());

  Corpus corpus;
  for (const Split split : {Split::Train, Split::Test}) {
    for (std::size_t f = 0; f < specs.size(); ++f) {
      const int count = split == Split::Train ? cfg.train_counts[f] : cfg.test_counts[f];
      for (int k = 0; k < count; ++k) {
        const std::string name = file_stem(specs[f].name) + "_" + std::string(to_string(split)) + "_" + std::to_string(k) + ".ppm";
        const RgbImage img = render_fish(specs[f], image_seed(cfg.seed, f, split, k), cfg);
        try {
          write_file_atomic(out_dir / name, encode_ppm(img));
        } catch (const Error& e) {
          throw Error(ErrorKind::IoFailure, kStage, e.what());
        }
        corpus.entries.push_back({name, specs[f].name, specs[f].poison, specs[f].cluster, split});
      }
    }
  }
  corpus.manifest = out_dir / kManifestFileName;
  try {
    write_file_atomic(corpus.manifest, format_manifest(corpus.entries));
  } catch (const Error& e) {
    throw Error(ErrorKind::IoFailure, kStage, e.what());
  }
  return corpus;
}

}  // namespace fishid
