#include <gtest/gtest.h>

#include <random>
#include <set>

#include "genb/fixture.hpp"
#include "genb/mock_backend.hpp"
#include "genb/synthesis.hpp"

using namespace genb;

namespace {

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected genb::Error";
  return Errc::IoError;
}

MockBackend::Options small_mock(MockBackend::Mode mode) {
  MockBackend::Options o;
  o.mode = mode;
  o.resolution = 64;
  return o;
}

ImageU8 random_rgb(int size, std::uint32_t seed) {
  std::mt19937 gen(seed);
  ImageU8 img(size, size, 3);
  for (auto& v : img.storage()) v = static_cast<std::uint8_t>(gen());
  return img;
}

ConditioningSet flat_conditioning(int size) {
  ConditioningSet c;
  c.crop.side = c.crop.out_size = size;
  c.depth_norm = ImageF(size, size, 1, 0.5f);
  c.normals = ImageU8(size, size, 3, 128);
  c.edges = Mask(size, size);
  c.pose = ImageU8(size, size, 3, 0);
  return c;
}

Mask box_mask(int size, int x0, int y0, int x1, int y1) {
  Mask m(size, size);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) m.at(x, y) = 1;
  }
  return m;
}

FrameRecord single_person_frame(const std::string& id = "f") {
  fixture::FrameSpec s;
  s.frame_id = id;
  fixture::HumanoidSpec p;
  p.person_id = 3;
  p.race = "asian";
  s.persons = {p};
  return fixture::render_frame(s);
}

}  // namespace

TEST(Parts, NamesAndOrder) {
  EXPECT_EQ(parse_part("feet"), Part::feet);
  EXPECT_EQ(code_of([] { parse_part("hands"); }), Errc::UnknownPart);
  std::vector<std::string> names;
  for (Part p : kPartOrder) names.push_back(to_string(p));
  EXPECT_EQ(names, (std::vector<std::string>{"head", "hair", "body", "feet"}));
}

TEST(Config, Defaults) {
  const GenerationConfig c;
  EXPECT_EQ(c.steps, 40);
  EXPECT_DOUBLE_EQ(c.guidance, 7.5);
  EXPECT_DOUBLE_EQ(c.strength(Part::head), 0.35);
  EXPECT_DOUBLE_EQ(c.strength(Part::hair), 0.35);
  EXPECT_DOUBLE_EQ(c.strength(Part::body), 0.35);
  EXPECT_DOUBLE_EQ(c.strength(Part::feet), 0.5);
  for (ControlType t : kAllControls) EXPECT_EQ(c.control(t), std::optional<double>(1.0));
}

TEST(Config, JsonParsingAndErrors) {
  const auto c = config_from_json(nlohmann::json::parse(R"({
    "global_seed": 9, "steps": 30, "strengths": {"feet": 0.7},
    "controls": {"normals": null, "edges": 0.25}, "canny": {"low": 0.05}
  })"));
  EXPECT_EQ(c.global_seed, 9u);
  EXPECT_EQ(c.steps, 30);
  EXPECT_DOUBLE_EQ(c.strength(Part::feet), 0.7);
  EXPECT_DOUBLE_EQ(c.strength(Part::head), 0.35);
  EXPECT_FALSE(c.control(ControlType::normals));
  EXPECT_EQ(c.control(ControlType::edges), std::optional<double>(0.25));
  EXPECT_DOUBLE_EQ(c.canny.low, 0.05);
  EXPECT_EQ(config_from_json(to_json(c)).global_seed, 9u);
  EXPECT_EQ(config_hash(config_from_json(to_json(c))), config_hash(c));

  EXPECT_EQ(code_of([] { config_from_json({{"steps", "many"}}); }), Errc::InvalidConfig);
  EXPECT_EQ(code_of([] { config_from_json({{"strengths", {{"body", 1.5}}}}); }), Errc::InvalidStrength);
  EXPECT_EQ(code_of([] { config_from_json({{"strengths", {{"hands", 0.5}}}}); }), Errc::UnknownPart);
  EXPECT_EQ(code_of([] { config_from_json({{"controls", {{"segmentation", 1.0}}}}); }),
            Errc::UnsupportedControl);
  EXPECT_EQ(code_of([] { config_from_json({{"debug_mode", "x"}}); }), Errc::InvalidConfig);
}

TEST(Config, HashTracksEveryField) {
  const GenerationConfig base;
  std::set<std::string> hashes{config_hash(base)};
  GenerationConfig c = base;
  c.global_seed = 1;
  hashes.insert(config_hash(c));
  c = base;
  c.strengths[2] = 0.4;
  hashes.insert(config_hash(c));
  c = base;
  c.controls[1] = std::nullopt;
  hashes.insert(config_hash(c));
  c = base;
  c.negative_prompt = "blurry";
  hashes.insert(config_hash(c));
  EXPECT_EQ(hashes.size(), 5u);
  EXPECT_EQ(config_hash(base), config_hash(GenerationConfig{}));
}

TEST(Presets, ControlRowsAndNoiseSweep) {
  const GenerationConfig base;
  struct Row {
    std::string name;
    std::set<ControlType> on;
    double strength;
  };
  using enum ControlType;
  const std::vector<Row> rows{{"single-edges", {edges}, 0.5},
                              {"single-depth", {depth}, 0.5},
                              {"single-normals", {normals}, 0.5},
                              {"single-pose", {pose}, 0.5},
                              {"cumulative-2", {depth, pose}, 0.5},
                              {"cumulative-3", {depth, pose, edges}, 0.5},
                              {"cumulative-4", {depth, pose, edges, normals}, 0.5},
                              {"noise-0.3", {depth, pose, edges, normals}, 0.3},
                              {"noise-0.5", {depth, pose, edges, normals}, 0.5},
                              {"noise-0.7", {depth, pose, edges, normals}, 0.7},
                              {"noise-0.9", {depth, pose, edges, normals}, 0.9}};
  std::vector<std::string> names;
  for (const Row& row : rows) {
    names.push_back(row.name);
    const GenerationConfig c = apply_preset(base, row.name);
    EXPECT_EQ(c.preset, row.name);
    for (ControlType t : kAllControls) {
      EXPECT_EQ(c.control(t).has_value(), row.on.contains(t)) << row.name << " " << to_string(t);
    }
    for (Part p : kPartOrder) EXPECT_DOUBLE_EQ(c.strength(p), row.strength) << row.name;
  }
  EXPECT_EQ(ablation_presets(), names);
  EXPECT_EQ(apply_preset(base, "none").preset, "none");
  for (const char* bad : {"single-segmentation", "cumulative-5", "noise-x", "noise-0.5x", "fancy"}) {
    EXPECT_THROW(apply_preset(base, bad), Error) << bad;
  }
  EXPECT_EQ(code_of([&] { apply_preset(base, "noise-1.5"); }), Errc::InvalidStrength);
  EXPECT_EQ(config_from_json({{"preset", "cumulative-3"}}).preset, "cumulative-3");
}

TEST(Seeds, DistinctPerPartAndStable) {
  std::set<std::uint64_t> seeds;
  for (Part p : kPartOrder) seeds.insert(part_seed(0, "frame_0000", 1, to_string(p)));
  seeds.insert(part_seed(1, "frame_0000", 1, "head"));
  seeds.insert(part_seed(0, "frame_0001", 1, "head"));
  seeds.insert(part_seed(0, "frame_0000", 2, "head"));
  EXPECT_EQ(seeds.size(), 7u);
  EXPECT_EQ(part_seed(0, "frame_0000", 1, "head"), fnv1a64("0/frame_0000/1/head"));
}

TEST(Prompts, Templates) {
  PersonMeta meta{Gender::female, "asian", std::nullopt};
  std::mt19937_64 rng(5);
  EXPECT_EQ(build_prompt(Part::head, meta, rng), "Realistic asian female face");
  EXPECT_EQ(build_prompt(Part::body, meta, rng), "Realistic female clothes");

  // Pool draws are rng() % pool size, color before type.
  std::mt19937_64 a(11), oracle(11);
  const std::string color = prompts::kHairColors[oracle() % 3];
  const std::string type = prompts::kHairTypes[oracle() % 6];
  EXPECT_EQ(build_prompt(Part::hair, meta, a), "Realistic " + color + " " + type + " asian female");

  meta.hair_color = "blond";
  std::mt19937_64 b(11), oracle2(11);
  EXPECT_EQ(build_prompt("hair", meta, b),
            "Realistic blond " + prompts::kHairTypes[oracle2() % 6] + " asian female");

  std::mt19937_64 c(3), oracle3(3);
  meta.gender = Gender::male;
  EXPECT_EQ(build_prompt(Part::feet, meta, c), "Realistic male " + prompts::kShoeTypes[oracle3() % 5]);
  EXPECT_EQ(code_of([&] { build_prompt("hands", meta, c); }), Errc::UnknownPart);
}

TEST(LatentMask, AnyCoverageAfterDilation) {
  Mask m(64, 64);
  m.at(10, 10) = 1;
  const LatentMask d0 = downsample_mask(m, 8, 0);
  EXPECT_EQ(std::count(d0.cells.begin(), d0.cells.end(), 1), 1);
  EXPECT_EQ(d0.at(1, 1), 1);
  const LatentMask d3 = downsample_mask(m);  // pixels 7..13 touch cells 0 and 1
  EXPECT_EQ(std::count(d3.cells.begin(), d3.cells.end(), 1), 4);
  EXPECT_EQ(d3.at(0, 0), 1);
  m.at(10, 10) = 0;
  m.at(12, 12) = 1;
  const LatentMask one = downsample_mask(m);  // 9..15 stays inside cell 1
  EXPECT_EQ(std::count(one.cells.begin(), one.cells.end(), 1), 1);
  m.at(12, 12) = 0;
  m.at(13, 13) = 1;  // 10..16 stays in cells 1 and 2
  const LatentMask d = downsample_mask(m);
  EXPECT_EQ(d.at(1, 1) + d.at(2, 2) + d.at(1, 2) + d.at(2, 1), 4);
  EXPECT_EQ(d.at(0, 0), 0);
  EXPECT_EQ(code_of([] { downsample_mask(Mask(60, 64)); }), Errc::ShapeMismatch);
}

TEST(Composite, CellwiseSelection) {
  LatentTensor a(2, 2, 2, 1.0f), b(2, 2, 2, -1.0f);
  const LatentMask m{2, 2, {1, 0, 0, 1}};
  const LatentTensor c = composite(m, a, b);
  EXPECT_EQ(c.data, (std::vector<float>{1, -1, -1, 1, 1, -1, -1, 1}));
  EXPECT_EQ(code_of([&] { composite(LatentMask{1, 2, {1, 1}}, a, b); }), Errc::ShapeMismatch);
}

TEST(Inpaint, TargetModeClosedForm) {
  MockBackend::Options o = small_mock(MockBackend::Mode::target);
  MockBackend probe(o);
  o.target = probe.encode(random_rgb(64, 21));
  MockBackend mock(o);
  const NoiseSchedule s = mock.schedule(40);
  const ImageU8 crop = random_rgb(64, 22);
  const Mask pixel = box_mask(64, 20, 12, 30, 40);
  PartPlan plan;
  plan.prompt = "Realistic female clothes";
  for (double strength : {0.35, 0.5, 1.0}) {
    plan.strength = strength;
    const InpaintResult r = inpaint_part(crop, plan, flat_conditioning(64), pixel, mock, s, 42);
    const LatentTensor x0 = mock.encode(crop);
    EXPECT_EQ(r.x0_latent, x0);
    EXPECT_EQ(r.steps_run, strength_to_start(strength, 40).steps);
    double worst = 0.0;
    for (int c = 0; c < x0.channels; ++c) {
      for (int y = 0; y < x0.height; ++y) {
        for (int x = 0; x < x0.width; ++x) {
          const double m = r.latent_mask.at(y, x);
          const double expect = m * o.target.at(c, y, x) + (1 - m) * x0.at(c, y, x);
          worst = std::max(worst, std::abs(expect - r.final_latent.at(c, y, x)));
        }
      }
    }
    EXPECT_LE(worst, 1e-6);
    // Outside the dilated pixel mask the crop keeps its bytes; inside it is the decoded target.
    const ImageU8 target_rgb = mock.decode(o.target);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        for (int c = 0; c < 3; ++c) {
          ASSERT_EQ(r.image.at(x, y, c), r.pixel_mask.at(x, y) ? target_rgb.at(x, y, c) : crop.at(x, y, c));
        }
      }
    }
    EXPECT_EQ(r.pixel_mask, dilate(pixel, 3));
  }
}

TEST(Inpaint, EmptyLatentMaskReturnsOriginalCrop) {
  MockBackend::Options o = small_mock(MockBackend::Mode::target);
  MockBackend probe(o);
  o.target = probe.encode(random_rgb(64, 1));
  MockBackend mock(o);
  const NoiseSchedule s = mock.schedule(40);
  const ImageU8 crop = random_rgb(64, 2);
  const LatentTensor x0 = mock.encode(crop);
  const LatentMask m{8, 8, std::vector<std::uint8_t>(64, 0)};
  StepContext ctx{mock, s, {}, 17};
  ctx.request.schedule_id = s.id;
  ctx.request.prompt_embed = mock.text_embed("p", "");
  const StartPoint start = strength_to_start(0.5, 40);
  LatentTensor x = forward_noise(x0, s, start.start_index, standard_normal_like(x0, initial_noise_seed(17)));
  for (int i = start.start_index; i < 40; ++i) x = composited_step(x, x0, m, i, ctx);
  EXPECT_EQ(x, x0);
  EXPECT_EQ(mock.decode(x), crop);
}

TEST(Inpaint, ConstantModeAndValidation) {
  MockBackend::Options o = small_mock(MockBackend::Mode::constant);
  o.constant = LatentTensor(192, 8, 8, 0.5f);
  MockBackend mock(o);
  const NoiseSchedule s = mock.schedule(10);
  const ImageU8 crop = random_rgb(64, 3);
  PartPlan plan;
  plan.prompt = "x";
  plan.strength = 0.3;
  const Mask pixel = box_mask(64, 30, 30, 31, 31);
  const InpaintResult r = inpaint_part(crop, plan, flat_conditioning(64), pixel, mock, s, 1);
  EXPECT_EQ(r.final_latent, composite(r.latent_mask, o.constant, mock.encode(crop)));
  EXPECT_EQ(mock.denoise_calls(), 3);

  EXPECT_EQ(code_of([&] { inpaint_part(crop, plan, flat_conditioning(64), Mask(64, 64), mock, s, 1); }),
            Errc::EmptyMask);
  plan.strength = 0.0;
  EXPECT_EQ(code_of([&] { inpaint_part(crop, plan, flat_conditioning(64), pixel, mock, s, 1); }),
            Errc::InvalidStrength);
  plan.strength = 0.5;
  plan.control_weights = {std::nullopt, std::nullopt, std::nullopt, 1.0};
  MockBackend::Options depth_only = small_mock(MockBackend::Mode::prompt_color);
  depth_only.supported_controls = {ControlType::depth};
  MockBackend limited(depth_only);
  EXPECT_EQ(code_of([&] { inpaint_part(crop, plan, flat_conditioning(64), pixel, limited, s, 1); }),
            Errc::UnsupportedControl);
}

TEST(Inpaint, ControlInputsFollowWeights) {
  ConditioningSet cond = flat_conditioning(8);
  cond.edges.at(2, 2) = 1;
  const auto inputs = control_inputs(cond, {0.5, std::nullopt, 1.0, 0.0});
  ASSERT_EQ(inputs.size(), 3u);
  EXPECT_EQ(inputs[0].type, ControlType::depth);
  EXPECT_DOUBLE_EQ(inputs[0].weight, 0.5);
  EXPECT_EQ(inputs[1].type, ControlType::edges);
  EXPECT_FLOAT_EQ(inputs[1].image->at(2, 2), 1.0f);
  EXPECT_FLOAT_EQ(inputs[1].image->at(3, 2), 0.0f);
  EXPECT_EQ(inputs[2].type, ControlType::pose);
}

TEST(Eligibility, Rules) {
  PartMaskSet set;
  for (auto& m : set.parts) m = Mask(10, 10);
  set.unoccluded_body = box_mask(10, 0, 0, 10, 10);
  set.silhouette = box_mask(10, 0, 0, 10, 8);  // visibility 0.8
  std::array<Mask, 4> parts;
  for (auto& m : parts) m = box_mask(10, 0, 0, 2, 2);
  set.face_pixel_count = 500;
  Eligibility e = part_eligibility(set, parts);
  EXPECT_TRUE(e.person_skipped);
  EXPECT_DOUBLE_EQ(e.visibility, 0.8);

  set.silhouette = box_mask(10, 0, 0, 9, 9);  // 0.81
  e = part_eligibility(set, parts);
  EXPECT_FALSE(e.person_skipped);
  EXPECT_EQ(e.parts, (std::vector<Part>{Part::head, Part::hair, Part::body, Part::feet}));

  set.face_pixel_count = 99;
  e = part_eligibility(set, parts);
  EXPECT_EQ(e.parts, (std::vector<Part>{Part::body, Part::feet}));
  set.face_pixel_count = 100;
  parts[3] = Mask(10, 10);
  e = part_eligibility(set, parts);
  EXPECT_EQ(e.parts, (std::vector<Part>{Part::head, Part::hair, Part::body}));

  set.unoccluded_body = Mask(10, 10);
  e = part_eligibility(set, parts);
  EXPECT_TRUE(e.person_skipped);
  EXPECT_EQ(e.reason, "not rendered in frame");
}

TEST(PartMasks, BodyUsesClothAndSkinRegions) {
  FrameRecord f = single_person_frame();
  const PersonGT& p = f.persons[0];
  const Resolution res{f.rgb.width(), f.rgb.height()};
  const PartMaskSet set = rasterize_person(p, *f.topology, f.camera, res, &f.depth);
  const Mask cloth = seg_mask(f.seg, p.person_id, SegKind::cloth);
  ASSERT_TRUE(any(cloth));
  auto masks = compose_part_masks(set, f.seg, p);
  EXPECT_EQ(masks[static_cast<int>(Part::body)], cloth);
  EXPECT_EQ(masks[static_cast<int>(Part::head)], set.part(BodyPart::face));
  EXPECT_EQ(masks[static_cast<int>(Part::hair)], set.part(BodyPart::scalp));
  EXPECT_EQ(masks[static_cast<int>(Part::feet)], set.part(BodyPart::feet));

  PersonGT skin = p;
  skin.cloth_skin_mask_present = true;
  Mask half = cloth;
  for (int y = 0; y < half.height(); ++y) {
    for (int x = 0; x < half.width() / 2; ++x) half.at(x, y) = 0;
  }
  ImageU8 seg = f.seg;
  for (int y = 0; y < seg.height(); ++y) {
    for (int x = 0; x < seg.width(); ++x) {
      if (cloth.at(x, y) && !half.at(x, y)) seg.at(x, y) = seg_value_body(p.person_id);
    }
  }
  masks = compose_part_masks(set, seg, skin);
  EXPECT_EQ(masks[static_cast<int>(Part::body)], mask_union(half, set.part(BodyPart::body)));
  // Hands are never part of any processed mask.
  const Mask& hands = set.part(BodyPart::hands);
  ASSERT_TRUE(any(hands));
  for (const Mask& m : masks) {
    for (std::size_t i = 0; i < m.size(); ++i) ASSERT_FALSE(m.storage()[i] && hands.storage()[i]);
  }
}

TEST(Frame, OutsideMaskInvarianceAndProvenance) {
  const FrameRecord f = single_person_frame();
  MockBackend mock;
  GenerationConfig cfg;
  cfg.global_seed = 5;
  int parts = 0;
  FrameOptions opt;
  opt.on_part = [&](const PartEvent& e) {
    ++parts;
    ASSERT_FALSE(e.failed);
    long changed = 0;
    for (int y = 0; y < e.before.height(); ++y) {
      for (int x = 0; x < e.before.width(); ++x) {
        for (int c = 0; c < 3; ++c) {
          if (e.frame_mask.at(x, y)) {
            changed += e.before.at(x, y, c) != e.after.at(x, y, c);
          } else {
            ASSERT_EQ(e.before.at(x, y, c), e.after.at(x, y, c)) << e.part << " " << x << "," << y;
          }
        }
      }
    }
    EXPECT_GT(changed, 0) << e.part;
  };
  const FrameResult r = process_frame(f, cfg, mock, opt);
  EXPECT_EQ(parts, 4);
  EXPECT_NE(r.rgb, f.rgb);
  const GenerationProvenance& p = r.provenance;
  EXPECT_NO_THROW(validate(p));
  ASSERT_EQ(p.parts.size(), 4u);
  const std::vector<int> steps{14, 14, 14, 20};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(p.parts[i].part, to_string(kPartOrder[i]));
    EXPECT_EQ(p.parts[i].steps_run, steps[i]);
    EXPECT_EQ(p.parts[i].status, "done");
    EXPECT_EQ(p.parts[i].seed, part_seed(5, "f", 3, p.parts[i].part));
  }
  EXPECT_EQ(p.prompts.at("3/head"), "Realistic asian female face");
  EXPECT_EQ(p.config_hash, config_hash(cfg));
  EXPECT_EQ(mock.denoise_calls(), 14 * 3 + 20);

  MockBackend again;
  const FrameResult r2 = process_frame(f, cfg, again);
  EXPECT_EQ(r2.rgb, r.rgb);
  EXPECT_EQ(r2.provenance, r.provenance);
}

TEST(Frame, FailedPartLeavesImageAndIsRecorded) {
  const FrameRecord f = single_person_frame();
  MockBackend::Options o;
  o.fail_prompt_substring = "clothes";
  MockBackend mock(o);
  std::vector<std::pair<std::string, bool>> seen;
  FrameOptions opt;
  opt.on_part = [&](const PartEvent& e) {
    seen.emplace_back(e.part, e.failed);
    if (e.failed) {
      EXPECT_EQ(e.before, e.after);
    }
  };
  const FrameResult r = process_frame(f, GenerationConfig{}, mock, opt);
  EXPECT_EQ(seen, (std::vector<std::pair<std::string, bool>>{
                      {"head", false}, {"hair", false}, {"body", true}, {"feet", false}}));
  EXPECT_EQ(r.provenance.parts[2].status, "failed");
  EXPECT_NE(r.provenance.parts[2].error.find("injected failure"), std::string::npos);
  EXPECT_EQ(r.provenance.parts[2].steps_run, 0);
  EXPECT_NO_THROW(validate(r.provenance));
}

TEST(Frame, EligibilityGatesViaCounters) {
  const FrameRecord base = single_person_frame();
  const PersonGT& p = base.persons[0];
  const Resolution res{base.rgb.width(), base.rgb.height()};
  const PartMaskSet full = rasterize_person(p, *base.topology, base.camera, res, &base.depth);
  const long faces = full.face_pixel_count;
  ASSERT_GT(faces, 120);

  auto run = [&](const FrameRecord& f) {
    MockBackend mock;
    const FrameResult r = process_frame(f, GenerationConfig{}, mock);
    std::vector<std::string> parts;
    for (const auto& rec : r.provenance.parts) parts.push_back(rec.part);
    return std::pair{parts, mock.denoise_calls()};
  };
  FrameRecord f = base;
  fixture::occlude_pixels(f, full.part(BodyPart::face), faces - 99);
  auto [parts99, calls99] = run(f);
  EXPECT_EQ(parts99, (std::vector<std::string>{"body", "feet"}));
  EXPECT_EQ(calls99, 14 + 20);

  f = base;
  fixture::occlude_pixels(f, full.part(BodyPart::face), faces - 100);
  auto [parts100, calls100] = run(f);
  EXPECT_EQ(parts100, (std::vector<std::string>{"head", "hair", "body", "feet"}));
  EXPECT_EQ(calls100, 3 * 14 + 20);

  f = base;
  fixture::occlude_pixels(f, full.silhouette, static_cast<long>(count_nonzero(full.silhouette)));
  auto [none, calls0] = run(f);
  EXPECT_TRUE(none.empty());
  EXPECT_EQ(calls0, 0);
}

TEST(Frame, DebugModesProcessOneRegion) {
  const FrameRecord f = single_person_frame();
  for (const char* mode : {"whole-body", "img2img"}) {
    GenerationConfig cfg;
    cfg.debug_mode = mode;
    MockBackend mock;
    const FrameResult r = process_frame(f, cfg, mock);
    ASSERT_EQ(r.provenance.parts.size(), 1u);
    EXPECT_EQ(r.provenance.parts[0].part, mode);
    EXPECT_EQ(r.provenance.parts[0].prompt, "Realistic female clothes");
  }
}
