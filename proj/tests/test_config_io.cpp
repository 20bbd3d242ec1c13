// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "segtcn/checkpoint.hpp"
#include "segtcn/config.hpp"
#include "segtcn/error.hpp"
#include "segtcn/features.hpp"
#include "segtcn/rng.hpp"
#include "segtcn/svg.hpp"
#include "segtcn/train.hpp"
#include "test_util.hpp"

using namespace segtcn;
using nlohmann::json;
using testutil::TempDir;

namespace {

ModelConfig small_arch() {
    ModelConfig cfg;
    cfg.input_dim = 6;
    cfg.num_classes = 3;
    cfg.feature_width = 8;
    cfg.pred_layers = 3;
    cfg.refine_layers = 2;
    cfg.refine_stages = 2;
    cfg.dropout = 0.25;
    return cfg;
}

template <typename ModelA, typename ModelB>
void check_params_bit_equal(const ModelA& a, const ModelB& b) {
    const auto& pa = a.params().all();
    const auto& pb = b.params().all();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CAPTURE(pa[i]->name);
        CHECK(pa[i]->name == pb[i]->name);
        CHECK(pa[i]->shape == pb[i]->shape);
        REQUIRE(pa[i]->values.size() == pb[i]->values.size());
        CHECK(std::memcmp(pa[i]->values.data(), pb[i]->values.data(),
                          pa[i]->values.size() * sizeof(float)) == 0);
    }
}

std::vector<std::string> keys_of(const json& j) {
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    std::sort(keys.begin(), keys.end());
    return keys;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos;
         at = text.find(needle, at + needle.size()))
        ++n;
    return n;
}

} // namespace

TEST_CASE("run config round trips through JSON with every field") {
    RunConfig cfg;
    cfg.raster.sigma = 3.5;
    cfg.raster.out_size = 64;
    cfg.raster.replicate_channels = 2;
    cfg.raster.crop_padding = 6;
    cfg.raster.distance_mode = DistanceMode::squared;
    cfg.encoder_grid = 4;
    cfg.model.feature_width = 32;
    cfg.model.pred_layers = 5;
    cfg.model.refine_layers = 4;
    cfg.model.refine_stages = 2;
    cfg.model.kernel = 5;
    cfg.model.dropout = 0.25;
    cfg.model.shared_refine_weights = true;
    cfg.loss.tau = 9.0;
    cfg.loss.alpha = 0.3;
    cfg.loss.log_floor = 1e-10;
    cfg.train.lr = 0.002;
    cfg.train.lr_stage2 = 0.0001;
    cfg.train.epochs = 7;
    cfg.train.epochs_stage2 = 3;
    cfg.train.beta1 = 0.8;
    cfg.train.beta2 = 0.99;
    cfg.train.eps = 1e-9;
    cfg.fusion_mode = FusionMode::supervision_only;
    cfg.supervise_branches = true;

    TempDir dir("config_roundtrip");
    const std::string path = dir.file("run.json");
    save_run_config(path, cfg);
    const RunConfig back = load_run_config(path);

    CHECK(back.raster.sigma == cfg.raster.sigma);
    CHECK(back.raster.out_size == cfg.raster.out_size);
    CHECK(back.raster.replicate_channels == cfg.raster.replicate_channels);
    CHECK(back.raster.crop_padding == cfg.raster.crop_padding);
    CHECK(back.raster.distance_mode == cfg.raster.distance_mode);
    CHECK(back.encoder_grid == cfg.encoder_grid);
    CHECK(back.model.feature_width == cfg.model.feature_width);
    CHECK(back.model.pred_layers == cfg.model.pred_layers);
    CHECK(back.model.refine_layers == cfg.model.refine_layers);
    CHECK(back.model.refine_stages == cfg.model.refine_stages);
    CHECK(back.model.kernel == cfg.model.kernel);
    CHECK(back.model.dropout == cfg.model.dropout);
    CHECK(back.model.shared_refine_weights == cfg.model.shared_refine_weights);
    CHECK(back.loss.tau == cfg.loss.tau);
    CHECK(back.loss.alpha == cfg.loss.alpha);
    CHECK(back.loss.log_floor == cfg.loss.log_floor);
    CHECK(back.train.lr == cfg.train.lr);
    CHECK(back.train.lr_stage2 == cfg.train.lr_stage2);
    CHECK(back.train.epochs == cfg.train.epochs);
    CHECK(back.train.epochs_stage2 == cfg.train.epochs_stage2);
    CHECK(back.train.beta1 == cfg.train.beta1);
    CHECK(back.train.beta2 == cfg.train.beta2);
    CHECK(back.train.eps == cfg.train.eps);
    CHECK(back.fusion_mode == cfg.fusion_mode);
    CHECK(back.supervise_branches == cfg.supervise_branches);

    SUBCASE("an empty object yields the documented defaults") {
        const RunConfig def = parse_run_config_json("{}");
        CHECK(def.raster.sigma == 0.6);
        CHECK(def.raster.out_size == 56);
        CHECK(def.encoder_grid == 8);
        CHECK(def.loss.tau == 16.0);
        CHECK(def.loss.alpha == 0.15);
        CHECK(def.train.lr == 0.001);
        CHECK(def.train.lr_stage2 == 0.0005);
        CHECK(def.fusion_mode == FusionMode::recurrent);
    }
    SUBCASE("partial sections keep unrelated defaults") {
        const RunConfig part = parse_run_config_json(R"({"loss": {"alpha": 0.5}})");
        CHECK(part.loss.alpha == 0.5);
        CHECK(part.loss.tau == 16.0);
        CHECK(part.raster.out_size == 56);
    }
}

TEST_CASE("config parsing rejects unknown keys by name") {
    CHECK_THROWS_WITH_AS(parse_run_config_json(R"({"rastr": {}})"),
                         doctest::Contains("rastr"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config_json(R"({"raster": {"smoothing": 1}})"),
                         doctest::Contains("smoothing"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config_json(R"({"raster": {"smoothing": 1}})"),
                         doctest::Contains("raster"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config_json(R"({"train": {"momentum": 0.9}})"),
                         doctest::Contains("momentum"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config_json("not json"),
                         doctest::Contains("not valid JSON"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config_json("[1, 2]"), doctest::Contains("config"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(parse_run_config_json(R"({"loss": {"tau": "hot"}})"),
                         doctest::Contains("tau"), ValidationError);
}

TEST_CASE("config validation reports grid divisibility with the numbers") {
    RunConfig cfg;
    cfg.encoder_grid = 9;
    CHECK_THROWS_WITH_AS(validate_run_config(cfg), doctest::Contains("9"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(validate_run_config(cfg), doctest::Contains("56"),
                         ValidationError);
    cfg.raster.out_size = 54; // 9 * 6, legal again
    CHECK_NOTHROW(validate_run_config(cfg));

    const std::string bad = R"({"encoder": {"grid": 5}})";
    CHECK_THROWS_WITH_AS(parse_run_config_json(bad), doctest::Contains("5"),
                         ValidationError);

    SUBCASE("other invalid settings are refused") {
        RunConfig c;
        c.loss.tau = 0.0;
        CHECK_THROWS_AS(validate_run_config(c), ValidationError);
        c = RunConfig{};
        c.train.beta1 = 1.0;
        CHECK_THROWS_AS(validate_run_config(c), ValidationError);
        c = RunConfig{};
        c.raster.sigma = -1.0;
        CHECK_THROWS_AS(validate_run_config(c), ValidationError);
        c = RunConfig{};
        c.train.epochs = -1;
        CHECK_THROWS_AS(validate_run_config(c), ValidationError);
    }
}

TEST_CASE("single checkpoints round trip bit-exactly") {
    TempDir dir("ckpt_single");
    const ModelConfig cfg = small_arch();
    SegModel<float> model(cfg);
    Rng init(11);
    model.init(init);

    const std::string path = dir.file("model.ckpt");
    save_checkpoint(path, model);
    CHECK(checkpoint_kind(path) == CheckpointKind::single);

    const SegModel<float> back = load_single_checkpoint(path);
    CHECK(back.config().input_dim == cfg.input_dim);
    CHECK(back.config().num_classes == cfg.num_classes);
    CHECK(back.config().feature_width == cfg.feature_width);
    CHECK(back.config().refine_stages == cfg.refine_stages);
    check_params_bit_equal(model, back);

    // The reloaded model computes the exact same function.
    Rng data(12);
    std::vector<float> feats(static_cast<std::size_t>(cfg.input_dim) * 20);
    for (float& x : feats) x = static_cast<float>(data.uniform(-1.0, 1.0));
    Tape<float> ta, tb;
    const auto ya = model.forward(ta, ta.input(cfg.input_dim, 20, feats.data()));
    const auto yb = back.forward(tb, tb.input(cfg.input_dim, 20, feats.data()));
    REQUIRE(ya.size() == yb.size());
    for (std::size_t s = 0; s < ya.size(); ++s)
        CHECK(std::memcmp(ya[s]->values.data(), yb[s]->values.data(),
                          ya[s]->values.size() * sizeof(float)) == 0);
}

TEST_CASE("fused checkpoints round trip bit-exactly") {
    TempDir dir("ckpt_fused");
    FusionConfig cfg;
    cfg.arch = small_arch();
    cfg.heat_input_dim = 6;
    cfg.aux_input_dim = 4;
    cfg.mode = FusionMode::supervision_only;
    cfg.supervise_branches = true;
    FusionModel<float> model(cfg);
    Rng init(13);
    model.init(init);

    const std::string path = dir.file("fused.ckpt");
    save_checkpoint(path, model);
    CHECK(checkpoint_kind(path) == CheckpointKind::fused);

    const FusionModel<float> back = load_fused_checkpoint(path);
    CHECK(back.config().heat_input_dim == 6);
    CHECK(back.config().aux_input_dim == 4);
    CHECK(back.config().mode == FusionMode::supervision_only);
    CHECK(back.config().supervise_branches == true);
    CHECK(back.config().arch.feature_width == cfg.arch.feature_width);
    check_params_bit_equal(model, back);
}

TEST_CASE("corrupt checkpoints are refused with a diagnosis") {
    TempDir dir("ckpt_corrupt");
    const ModelConfig cfg = small_arch();
    SegModel<float> model(cfg);
    Rng init(17);
    model.init(init);
    const std::string path = dir.file("model.ckpt");
    save_checkpoint(path, model);
    const std::string good = testutil::slurp(path);

    SUBCASE("wrong magic") {
        testutil::spit(dir.file("bad.ckpt"), "SEGTCN-CKPT v2\n" + good.substr(15));
        CHECK_THROWS_WITH_AS(load_single_checkpoint(dir.file("bad.ckpt")),
                             doctest::Contains("not a checkpoint file"), RuntimeError);
    }
    SUBCASE("missing manifest") {
        testutil::spit(dir.file("bad.ckpt"), "SEGTCN-CKPT v1\n");
        CHECK_THROWS_WITH_AS(checkpoint_kind(dir.file("bad.ckpt")),
                             doctest::Contains("manifest missing"), RuntimeError);
    }
    SUBCASE("manifest is not JSON") {
        testutil::spit(dir.file("bad.ckpt"), "SEGTCN-CKPT v1\n{oops\n");
        CHECK_THROWS_WITH_AS(checkpoint_kind(dir.file("bad.ckpt")),
                             doctest::Contains("not valid JSON"), RuntimeError);
    }
    SUBCASE("truncated payload names the starved parameter") {
        testutil::spit(dir.file("bad.ckpt"), good.substr(0, good.size() - 10));
        CHECK_THROWS_WITH_AS(load_single_checkpoint(dir.file("bad.ckpt")),
                             doctest::Contains("truncated"), RuntimeError);
    }
    SUBCASE("trailing bytes") {
        testutil::spit(dir.file("bad.ckpt"), good + "x");
        CHECK_THROWS_WITH_AS(load_single_checkpoint(dir.file("bad.ckpt")),
                             doctest::Contains("trailing bytes"), RuntimeError);
    }
    SUBCASE("kind mismatch both ways") {
        CHECK_THROWS_WITH_AS(load_fused_checkpoint(path),
                             doctest::Contains("expected a fused checkpoint"),
                             RuntimeError);
        FusionConfig fcfg;
        fcfg.arch = small_arch();
        fcfg.heat_input_dim = 6;
        fcfg.aux_input_dim = 4;
        FusionModel<float> fused(fcfg);
        Rng r(5);
        fused.init(r);
        save_checkpoint(dir.file("fused.ckpt"), fused);
        CHECK_THROWS_WITH_AS(load_single_checkpoint(dir.file("fused.ckpt")),
                             doctest::Contains("expected a single-branch checkpoint"),
                             RuntimeError);
    }
    SUBCASE("unknown kind") {
        std::string tampered = good;
        tampered.replace(tampered.find("\"kind\":\"single\""), 15, "\"kind\":\"barrel\"");
        testutil::spit(dir.file("bad.ckpt"), tampered);
        CHECK_THROWS_WITH_AS(checkpoint_kind(dir.file("bad.ckpt")),
                             doctest::Contains("barrel"), RuntimeError);
    }
    SUBCASE("renamed parameter breaks the layout check") {
        std::string tampered = good;
        const std::size_t at = tampered.find("stage0.adapter.w");
        REQUIRE(at != std::string::npos);
        tampered.replace(at, 16, "stage0.adaptor.w");
        testutil::spit(dir.file("bad.ckpt"), tampered);
        CHECK_THROWS_WITH_AS(load_single_checkpoint(dir.file("bad.ckpt")),
                             doctest::Contains("does not match model layout"),
                             RuntimeError);
    }
}

TEST_CASE("feature files round trip under a readable header") {
    TempDir dir("feat_io");
    FeatureTrack track;
    track.dim = 4;
    track.values = {0.5f, -1.0f, 2.25f, 0.0f, 1.0f, 2.0f, 3.0f, 4.0f,
                    -0.125f, 9.5f, 1e-3f, 7.0f};
    const std::string path = dir.file("t.feat");
    save_feature_track(path, track);

    const std::string raw = testutil::slurp(path);
    CHECK(raw.substr(0, 18) == "FEAT v1 3 4 f32le\n");
    CHECK(raw.size() == 18 + 12 * sizeof(float));

    const FeatureTrack back = load_feature_track(path);
    CHECK(back.dim == 4);
    CHECK(back.frame_count() == 3);
    CHECK(back.values == track.values);

    SUBCASE("header and payload corruption are rejected") {
        testutil::spit(dir.file("bad.feat"), "FEAT v2 3 4 f32le\n" + raw.substr(18));
        CHECK_THROWS_WITH_AS(load_feature_track(dir.file("bad.feat")),
                             doctest::Contains("bad FEAT header"), ValidationError);
        testutil::spit(dir.file("bad.feat"), raw.substr(0, raw.size() - 3));
        CHECK_THROWS_WITH_AS(load_feature_track(dir.file("bad.feat")),
                             doctest::Contains("truncated"), ValidationError);
        testutil::spit(dir.file("bad.feat"), "FEAT v1 0 4 f32le\n");
        CHECK_THROWS_AS(load_feature_track(dir.file("bad.feat")), ValidationError);
        CHECK_THROWS_AS(load_feature_track(dir.file("absent.feat")), ValidationError);
    }
    SUBCASE("inconsistent shapes cannot be written") {
        FeatureTrack ragged;
        ragged.dim = 5;
        ragged.values.assign(12, 0.0f); // 12 % 5 != 0
        CHECK_THROWS_AS(save_feature_track(dir.file("r.feat"), ragged),
                        ValidationError);
    }
}

TEST_CASE("eval reports conform to the published schema shape") {
    EvalReport report;
    report.split = "test";
    report.drop_p = 0.25;
    report.sequences.push_back({"vid_a", 10, 80.0, 100.0, 50.0, 100.0, {}, {}});
    report.sequences.push_back({"vid_b", 20, 60.0, 80.0, 100.0, 90.0, {}, {}});
    report.accuracy = {70.0, 10.0};
    report.edit = {90.0, 10.0};
    report.f1_10 = {75.0, 25.0};
    report.map = {95.0, 5.0};

    const json j = json::parse(eval_report_json(report));
    CHECK(keys_of(j) == std::vector<std::string>{"count", "drop_p", "metrics",
                                                 "sequences", "split"});
    CHECK(j.at("split") == "test");
    CHECK(j.at("drop_p") == 0.25);
    CHECK(j.at("count") == 2);

    const json& metrics = j.at("metrics");
    CHECK(keys_of(metrics) == std::vector<std::string>{"accuracy", "edit", "f1_10", "map"});
    for (const char* name : {"accuracy", "edit", "f1_10", "map"}) {
        const json& stat = metrics.at(name);
        CHECK(keys_of(stat) == std::vector<std::string>{"mean", "std"});
        CHECK(stat.at("mean").is_number());
        CHECK(stat.at("mean").get<double>() >= 0.0);
        CHECK(stat.at("mean").get<double>() <= 100.0);
        CHECK(stat.at("std").get<double>() >= 0.0);
    }
    CHECK(metrics.at("accuracy").at("mean") == 70.0);
    CHECK(metrics.at("f1_10").at("std") == 25.0);

    const json& seqs = j.at("sequences");
    REQUIRE(seqs.is_array());
    REQUIRE(seqs.size() == 2);
    for (const json& s : seqs) {
        CHECK(keys_of(s) == std::vector<std::string>{"accuracy", "edit", "f1_10", "frames",
                                                     "id", "map"});
        CHECK(s.at("id").is_string());
        CHECK(s.at("frames").is_number_integer());
        CHECK(s.at("frames").get<int>() >= 1);
    }
    CHECK(seqs[0].at("id") == "vid_a");
    CHECK(seqs[1].at("accuracy") == 60.0);

    SUBCASE("saving appends nothing beyond the document") {
        TempDir dir("report_io");
        save_eval_report(dir.file("r.json"), report);
        const json reread = json::parse(testutil::slurp(dir.file("r.json")));
        CHECK(reread == j);
    }
}

TEST_CASE("timeline svg draws one rectangle per segment") {
    std::vector<TimelineRow> rows;
    rows.push_back({"truth", {0, 0, 1, 1, 2}});
    rows.push_back({"pred", {0, 1, 1, 2, 2}});
    const std::string svg = timeline_svg(rows, 3);

    CHECK(svg.rfind("<svg xmlns", 0) == 0);
    CHECK(svg.substr(svg.size() - 7) == "</svg>\n");
    CHECK(count_occurrences(svg, "<rect") == 6);
    CHECK(count_occurrences(svg, "<text") == 2);
    CHECK(svg.find("truth") != std::string::npos);
    CHECK(svg.find("pred") != std::string::npos);
    for (int c = 0; c < 3; ++c)
        CHECK(svg.find(class_color(c, 3)) != std::string::npos);

    // Deterministic output: repeated calls match and the file equals the string.
    CHECK(timeline_svg(rows, 3) == svg);
    TempDir dir("svg_io");
    write_timeline_svg(dir.file("t.svg"), rows, 3);
    CHECK(testutil::slurp(dir.file("t.svg")) == svg);

    SUBCASE("colors are distinct hex codes") {
        std::vector<std::string> colors;
        for (int c = 0; c < 6; ++c) {
            const std::string col = class_color(c, 6);
            REQUIRE(col.size() == 7);
            CHECK(col[0] == '#');
            CHECK(col.find_first_not_of("0123456789abcdef", 1) == std::string::npos);
            colors.push_back(col);
        }
        std::sort(colors.begin(), colors.end());
        CHECK(std::adjacent_find(colors.begin(), colors.end()) == colors.end());
    }
    SUBCASE("degenerate inputs are refused") {
        CHECK_THROWS_AS(timeline_svg({}, 3), ValidationError);
        CHECK_THROWS_WITH_AS(timeline_svg({{"empty", {}}}, 3),
                             doctest::Contains("empty"), ValidationError);
        CHECK_THROWS_AS(class_color(0, 0), ValidationError);
    }
}
