#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tuef/artifacts.hpp"
#include "tuef/pipeline.hpp"
#include "tuef/synthetic.hpp"

int main(int argc, char** argv) {
  using namespace tuef;
  CLI::App app{"Topic-oriented expert finding pipeline"};
  app.set_config("--config", "", "TOML/INI config file; flags override it");
  app.fallthrough();
  app.require_subcommand(1, 1);

  PipelineConfig cfg;
  std::string mode = "tuef";
  app.add_option("--data", cfg.data, "posts file (.jsonl or .xml dump)");
  app.add_option("--users", cfg.users, "optional users file with reputations (JSONL)");
  app.add_option("--artifacts", cfg.artifacts, "artifact directory")->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "number of feature tags")->capture_default_str();
  app.add_option("--k-min", cfg.k_min, "smallest k tried")->capture_default_str();
  app.add_option("--k-max", cfg.k_max, "largest k tried")->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "accepted answers needed to enter a layer")->capture_default_str();
  app.add_option("--delta", cfg.delta, "cosine edge threshold")->capture_default_str();
  app.add_option("--beta", cfg.beta, "accepted answers needed to be an expert candidate")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "stop collecting once p <= alpha")->capture_default_str();
  app.add_option("--walks", cfg.walks, "random walks per collected expert")->capture_default_str();
  app.add_option("--steps", cfg.steps, "steps per random walk")->capture_default_str();
  app.add_option("--top-n", cfg.top_n, "BM25 results per index")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--mode", mode, "tuef, bc, bm25, nb, cb, sl or norw")->capture_default_str();
  app.add_option("--tuning-budget", cfg.tuning_budget, "random-search draws (0 = midpoint)")->capture_default_str();
  app.add_option("--split-ratio", cfg.split_ratio, "train share of questions")->capture_default_str();
  app.add_option("--ltr-queries", cfg.ltr_queries, "latest training queries used for LtR")->capture_default_str();
  app.add_option("--test-queries", cfg.test_queries, "test queries evaluated")->capture_default_str();
  app.add_option("--ltr-train-ratio", cfg.ltr_train_ratio, "LtR train share (rest is validation)")->capture_default_str();
  app.add_flag("!--keep-stopwords", cfg.remove_stopwords, "index and query text without stopword removal");
  app.add_flag("--force", cfg.force, "ignore config-hash mismatches of upstream artifacts");
  app.add_flag("!--quiet", cfg.verbose, "suppress progress logs");

  std::vector<CLI::App*> stage_cmds;
  for (const char* s : kStages) stage_cmds.push_back(app.add_subcommand(s, std::string("run the ") + s + " stage"));
  CLI::App* index_cmd = stage_cmds[4];
  CLI::App* select_cmd = stage_cmds[5];
  index_cmd->add_subcommand("build", "build both indexes (same as plain 'index')");
  auto* index_query = index_cmd->add_subcommand("query", "BM25 lookup against a built index");
  std::string query_text;
  std::string query_kind = "text";
  std::size_t query_top = 10;
  index_query->add_option("text", query_text, "query text, or tags for the tag index")->required();
  index_query->add_option("--kind", query_kind, "tag or text")->check(CLI::IsMember({"tag", "text"}))->capture_default_str();
  index_query->add_option("--top", query_top, "results shown")->capture_default_str();
  std::filesystem::path question_file;
  select_cmd->add_option("--question-file", question_file,
                         "select candidates for one question (JSON with title, body, tags) and print them");

  auto* run = app.add_subcommand("run", "run every stage");

  std::vector<std::string> modes = {"tuef", "bc", "bm25", "nb", "cb", "sl", "norw"};
  auto* ablate = app.add_subcommand("ablate", "run several modes and compare them");
  ablate->add_option("--modes", modes, "modes to compare")->capture_default_str();

  SyntheticSpec spec;
  std::filesystem::path synth_out = "synthetic_posts.jsonl";
  std::filesystem::path truth_out;
  auto* synth = app.add_subcommand("synth", "generate a planted synthetic corpus");
  synth->add_option("--out", synth_out, "posts output (JSONL)")->capture_default_str();
  synth->add_option("--truth", truth_out, "ground-truth sidecar (JSON); defaults to <out>.truth.json");
  synth->add_option("--users", spec.users)->capture_default_str();
  synth->add_option("--experts", spec.experts)->capture_default_str();
  synth->add_option("--tags", spec.tags)->capture_default_str();
  synth->add_option("--topics", spec.topics)->capture_default_str();
  synth->add_option("--questions", spec.questions)->capture_default_str();
  synth->add_option("--concentration", spec.affinity_concentration, "expert affinity on the primary topic")
      ->capture_default_str();
  synth->add_option("--active-users", spec.active_users)->capture_default_str();
  synth->add_option("--synth-seed", spec.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.mode = ablation_mode_from_string(mode);
    for (std::size_t i = 0; i < stage_cmds.size(); ++i) {
      if (!*stage_cmds[i]) continue;
      if (stage_cmds[i] == index_cmd && *index_query) {
        const auto kind = query_kind == "tag" ? IndexKind::kTag : IndexKind::kText;
        for (const auto& r : query_index(cfg, kind, query_text, query_top)) {
          std::cout << r.question << '\t' << r.expert << '\t' << r.score << '\n';
        }
      } else if (stage_cmds[i] == select_cmd && !question_file.empty()) {
        std::cout << candidate_set_json(select_for_question(cfg, read_question_file(question_file)), 2) << '\n';
      } else {
        run_stage(kStages[i], cfg);
      }
    }
    if (*run) {
      run_pipeline(cfg);
      std::cout << read_text(ArtifactLayout{cfg.artifacts}.report_text());
    }
    if (*ablate) {
      std::vector<AblationMode> ms;
      for (const auto& m : modes) ms.push_back(ablation_mode_from_string(m));
      std::cout << run_ablation(cfg, ms).to_text();
    }
    if (*synth) {
      const auto corpus = generate_synthetic(spec);
      write_posts_jsonl(corpus.posts, synth_out);
      write_truth_json(corpus.truth, truth_out.empty() ? std::filesystem::path(synth_out.string() + ".truth.json") : truth_out);
      std::clog << "[synth] " << corpus.posts.size() << " posts written to " << synth_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
