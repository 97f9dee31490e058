#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>

#include "sgreen/config.hpp"
#include "sgreen/green_model.hpp"
#include "sgreen/io.hpp"
#include "sgreen/problems.hpp"

#include "cli_commands.hpp"

namespace fs = std::filesystem;

namespace sgreen::cli {

namespace {

AugmentedKind kind_from_config(const Config& cfg, const EllipticProblem& problem) {
    const std::string kind_name =
        cfg.get_string("problem.kind", AugmentedKind::default_for(problem.dim).to_string());
    return AugmentedKind::from_string(kind_name, cfg.get_double("problem.power_exponent", -0.2));
}

}  // namespace

TrainConfig train_config_from(const Config& cfg) {
    TrainConfig tc;
    tc.depth = cfg.get_int("train.depth");
    tc.width = cfg.get_int("train.width");
    tc.beta_snglr = cfg.get_double("train.beta_snglr");
    tc.beta_bndry = cfg.get_double("train.beta_bndry");
    tc.beta_symtr = cfg.get_double("train.beta_symtr");
    tc.n_regular = cfg.get_int("train.n_regular");
    tc.n_singular = cfg.get_int("train.n_singular");
    tc.n_boundary = cfg.get_int("train.n_boundary");
    tc.n_sources = cfg.get_int("train.n_sources");
    tc.learning_rate = cfg.get_double("train.learning_rate");
    tc.milestones = cfg.get_ints("train.milestones", {});
    tc.epochs = cfg.get_int("train.epochs");
    tc.seed = cfg.get_uint64("train.seed", 1);
    tc.eps_radii = cfg.get_doubles("train.eps_radii", {});
    tc.r_excl = cfg.get_double("train.r_excl", 0.0);
    tc.batch_sources = cfg.get_int("train.batch_sources", 0);
    tc.batch_points = cfg.get_int("train.batch_points", 0);
    tc.batch_boundary = cfg.get_int("train.batch_boundary", 0);
    tc.weight_decay = cfg.get_double("train.weight_decay", 1e-2);
    tc.adam_beta1 = cfg.get_double("train.adam_beta1", 0.9);
    tc.adam_beta2 = cfg.get_double("train.adam_beta2", 0.999);
    tc.adam_eps = cfg.get_double("train.adam_eps", 1e-8);
    tc.log_every = cfg.get_int("train.log_every", 100);
    return tc;
}

int run_train(const std::string& config_path, const Context& ctx) {
    const Config cfg = Config::parse_file(config_path);
    const EllipticProblem problem = manufactured_case(cfg.get_string("problem.name"));
    const AugmentedKind kind = kind_from_config(cfg, problem);

    TrainConfig tc = train_config_from(cfg);
    if (ctx.seed) tc.seed = *ctx.seed;

    const std::string model_path =
        cfg.get_string("output.model", ctx.out_dir + "/" + problem.name + ".model");
    const std::string loss_path =
        cfg.get_string("output.loss_log", ctx.out_dir + "/" + problem.name + "_loss.csv");
    fs::create_directories(fs::path(model_path).parent_path().empty()
                               ? "."
                               : fs::path(model_path).parent_path().string());
    fs::create_directories(fs::path(loss_path).parent_path().empty()
                               ? "."
                               : fs::path(loss_path).parent_path().string());

    RunManifest manifest;
    manifest.command = "train " + config_path;
    manifest.config_digest = file_content_hash(config_path);
    manifest.seed = tc.seed;
    manifest.started = timestamp_utc();

    CsvWriter log(loss_path, {"epoch", "total", "reglr", "snglr", "bndry", "symtr", "lr"});
    TrainLogEntry last;
    GreenSurrogate surrogate =
        train(problem, kind, tc, [&](const TrainLogEntry& e) {
            log.row({static_cast<double>(e.epoch), e.total, e.reglr, e.snglr, e.bndry, e.symtr,
                     e.lr});
            last = e;
        });
    log.close();

    save_surrogate(surrogate, model_path);
    manifest.finished = timestamp_utc();
    manifest.outputs = {model_path, model_path + ".meta", loss_path};
    manifest.model_hash = file_content_hash(model_path);
    manifest.extra.emplace_back("problem", problem.name);
    manifest.extra.emplace_back("kind", kind.to_string());
    write_manifest(manifest, model_path + ".manifest.json");

    std::printf("trained %s: final total loss %.6e (reglr %.3e snglr %.3e bndry %.3e symtr %.3e)\n",
                problem.name.c_str(), last.total, last.reglr, last.snglr, last.bndry, last.symtr);
    std::printf("model: %s\n", model_path.c_str());
    return 0;
}

}  // namespace sgreen::cli
