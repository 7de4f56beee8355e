// rvw: bounds from description lengths, and description lengths from
// .rvw descriptions.
//
// Exit codes: 0 success, 1 a verification check failed, 2 usage or input
// error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rvw/rvw.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rvw::Error(rvw::ErrorCode::io_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

struct Common {
  std::string format = "text";
  std::string codebook_path;
  std::uint64_t n_test = 50000;
  std::uint64_t cap_c = 5000;
  double delta = 0.05;

  rvw::RunConfig run() const {
    return {n_test, cap_c, delta, rvw::format_from_string(format)};
  }
};

void add_format(CLI::App* app, Common& c) {
  app->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
}

void add_regime(CLI::App* app, Common& c) {
  app->add_option("--n", c.n_test, "Test-set size N")->capture_default_str();
  app->add_option("--cap-c", c.cap_c, "Largest description length C in bits")
      ->capture_default_str();
  app->add_option("--delta", c.delta, "Confidence parameter")->capture_default_str();
}

/// Holds a loaded codebook when --codebook / RVW_CODEBOOK is given.
struct CodebookHolder {
  std::unique_ptr<rvw::Codebook> owned;
  const rvw::Codebook& get(const std::string& flag) {
    std::string path = flag;
    if (path.empty()) {
      if (const char* env = std::getenv("RVW_CODEBOOK")) path = env;
    }
    if (path.empty()) return rvw::Codebook::standard();
    owned = std::make_unique<rvw::Codebook>(rvw::Codebook::load(path));
    return *owned;
  }
};

struct CountOpts {
  std::string file;
  std::string english = "char";
  double char_rate = 1.0;
  std::uint32_t word_bits = 10;
  std::string profile = "uniform8";
  std::string inherit;
  std::string order_suffix = "all";
  std::string legend = "symbol";
  std::uint32_t hyperparam_bits = 8;
  std::uint32_t constant_bits = 8;
};

rvw::CountConfig make_count_config(const CountOpts& o, const rvw::Codebook& cb) {
  rvw::CountConfig cfg;
  cfg.english = o.english == "word" ? rvw::EnglishMode::per_word(o.word_bits)
                                    : rvw::EnglishMode::per_char(o.char_rate);
  cfg.profile = rvw::CalibrationProfile::by_name(o.profile);
  cfg.order_suffix = o.order_suffix == "all"
                         ? rvw::OrderSuffix::all_edges
                         : rvw::OrderSuffix::order_sensitive_only;
  cfg.legend = o.legend == "symbol" ? rvw::LegendMode::per_symbol
                                    : rvw::LegendMode::per_vertex;
  cfg.hyperparam_bits = o.hyperparam_bits;
  cfg.constant_bits = o.constant_bits;
  cfg.codebook = &cb;
  return cfg;
}

rvw::BitLedger count_file(const std::string& path, const std::string& inherit,
                          const rvw::CountConfig& cfg) {
  if (ends_with(path, ".json")) {
    const auto j = nlohmann::json::parse(read_file(path));
    return rvw::count_equation(rvw::graph_from_json(j), cfg);
  }
  auto doc = rvw::parse(read_file(path), cfg.cb());
  if (!inherit.empty()) doc.inherit_from(rvw::parse(read_file(inherit), cfg.cb()));
  return rvw::count_description(doc, cfg);
}

struct VerifyOpts {
  std::uint64_t trials = 0;  // 0: per-check default
  std::uint64_t seed = 42;
  unsigned workers = 1;
  double p = 0.5, eps = 0.1;
  std::uint64_t n = 100;
  std::uint64_t s_bits = 4, cov_n = 2000, cov_c = 100, classifiers = 16;
  double cov_delta = 0.05, class_error = 0.2;
  std::uint64_t grid_p = 100, grid_eps = 100;
};

rvw::VerifyCheck run_chernoff(const VerifyOpts& o) {
  rvw::McConfig cfg{o.trials ? o.trials : 1000000, o.seed, o.workers};
  const auto r = rvw::mc_chernoff(o.p, o.eps, o.n, cfg);
  return {"chernoff",
          {{"p", o.p}, {"eps", o.eps}, {"n", o.n}},
          rvw::to_json(r),
          r.passed};
}

rvw::VerifyCheck run_coverage(const VerifyOpts& o) {
  rvw::McConfig cfg{o.trials ? o.trials : 100000, o.seed, o.workers};
  const std::vector<double> errs(o.classifiers, o.class_error);
  const auto r =
      rvw::mc_theorem_coverage(o.s_bits, o.cov_n, o.cov_c, o.cov_delta, errs, cfg);
  return {"coverage",
          {{"s_bits", o.s_bits},
           {"n", o.cov_n},
           {"cap_c", o.cov_c},
           {"delta", o.cov_delta},
           {"classifiers", o.classifiers},
           {"class_error", o.class_error}},
          rvw::to_json(r),
          r.passed};
}

rvw::VerifyCheck run_kl(const VerifyOpts& o) {
  const auto r = rvw::kl_scan(o.grid_p, o.grid_eps);
  return {"kl_scan",
          {{"grid_p", o.grid_p}, {"grid_eps", o.grid_eps}},
          rvw::to_json(r),
          r.violations == 0};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalization bounds from description length"};
  app.require_subcommand(1);
  Common common;
  CodebookHolder codebooks;

  // bound
  auto* bound = app.add_subcommand("bound", "Bound on population error");
  double p_hat = 0.0;
  std::uint64_t bits = 0;
  bound->add_option("--p-hat", p_hat, "Observed test error")->required();
  bound->add_option("--bits", bits, "Description length in bits")->required();
  add_regime(bound, common);
  add_format(bound, common);

  // count
  auto* count = app.add_subcommand("count", "Itemized description length");
  CountOpts co;
  count->add_option("file,--file", co.file, ".rvw description or graph .json")
      ->required();
  count->add_option("--english", co.english, "English rubric")
      ->check(CLI::IsMember({"char", "word"}))
      ->capture_default_str();
  count->add_option("--char-rate", co.char_rate, "Bits per character")
      ->capture_default_str();
  count->add_option("--word-bits", co.word_bits, "Bits per word")->capture_default_str();
  count->add_option("--profile", co.profile, "Hyperparameter calibration profile")
      ->check(CLI::IsMember({"uniform8", "paper-resnet"}))
      ->capture_default_str();
  count->add_option("--inherit", co.inherit,
                    "Baseline description; sections with matching names cost 0");
  count->add_option("--order-suffix", co.order_suffix, "Edges carrying an order bit")
      ->check(CLI::IsMember({"all", "order-sensitive"}))
      ->capture_default_str();
  count->add_option("--legend", co.legend, "Operator legend charge")
      ->check(CLI::IsMember({"symbol", "vertex"}))
      ->capture_default_str();
  count->add_option("--hyperparam-bits", co.hyperparam_bits)->capture_default_str();
  count->add_option("--constant-bits", co.constant_bits)->capture_default_str();
  count->add_option("--codebook", common.codebook_path, "Codebook JSON")
      ->envname("RVW_CODEBOOK");
  add_format(count, common);

  // table
  auto* table = app.add_subcommand("table", "Bounds for a set of models");
  std::string preset;
  std::vector<std::string> rows, doc_rows;
  CountOpts table_count;
  table->add_option("--paper-preset", preset, "Reported inputs")
      ->check(CLI::IsMember({"option1", "option2"}));
  table->add_option("--row", rows, "MODEL,P_HAT,BITS_WITH_BASELINE,BITS_WITHOUT");
  table->add_option("--doc", doc_rows,
                    "MODEL,P_HAT,FILE.rvw (bits from the counted description)");
  table->add_option("--english", table_count.english)
      ->check(CLI::IsMember({"char", "word"}));
  table->add_option("--profile", table_count.profile)
      ->check(CLI::IsMember({"uniform8", "paper-resnet"}));
  table->add_option("--codebook", common.codebook_path)->envname("RVW_CODEBOOK");
  add_regime(table, common);
  add_format(table, common);

  // verify
  auto* verify = app.add_subcommand("verify", "Monte Carlo and grid checks");
  VerifyOpts vo;
  std::string check = "all";
  verify->add_option("check", check, "Which check")
      ->check(CLI::IsMember({"all", "chernoff", "coverage", "kl"}))
      ->capture_default_str();
  verify->add_option("--trials", vo.trials, "Trials (default per check)");
  verify->add_option("--seed", vo.seed)->capture_default_str();
  verify->add_option("--workers", vo.workers)->capture_default_str();
  verify->add_option("--p", vo.p)->capture_default_str();
  verify->add_option("--eps", vo.eps)->capture_default_str();
  verify->add_option("--n", vo.n, "Samples per Chernoff trial")->capture_default_str();
  verify->add_option("--s-bits", vo.s_bits)->capture_default_str();
  verify->add_option("--test-size", vo.cov_n)->capture_default_str();
  verify->add_option("--cap-c", vo.cov_c)->capture_default_str();
  verify->add_option("--delta", vo.cov_delta)->capture_default_str();
  verify->add_option("--classifiers", vo.classifiers)->capture_default_str();
  verify->add_option("--class-error", vo.class_error)->capture_default_str();
  verify->add_option("--grid-p", vo.grid_p)->capture_default_str();
  verify->add_option("--grid-eps", vo.grid_eps)->capture_default_str();
  add_format(verify, common);

  // parse
  auto* parse = app.add_subcommand("parse", "Parse a description");
  std::string parse_file;
  parse->add_option("file,--file", parse_file, ".rvw description")->required();
  parse->add_option("--codebook", common.codebook_path)->envname("RVW_CODEBOOK");
  add_format(parse, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const auto run = common.run();
    if (*bound) {
      const rvw::BoundInputs in{p_hat, bits, run.cap_c, run.delta, run.n_test};
      std::cout << rvw::render_bound(in, rvw::solve_bound(in), run.format);
      return kExitOk;
    }
    if (*count) {
      const auto& cb = codebooks.get(common.codebook_path);
      const auto ledger = count_file(co.file, co.inherit, make_count_config(co, cb));
      std::cout << rvw::render_ledger(ledger, run.format);
      return kExitOk;
    }
    if (*table) {
      std::vector<rvw::TableRow> out;
      if (!preset.empty()) {
        for (const auto& r : rvw::paper_preset(preset))
          out.push_back(rvw::make_row(r, run));
      }
      for (const auto& spec : rows) {
        const auto f = split(spec, ',');
        if (f.size() != 4)
          throw rvw::Error(rvw::ErrorCode::invalid_input, "bad --row '" + spec + "'");
        out.push_back(rvw::make_row(
            {f[0], std::stod(f[1]), std::stoull(f[2]), std::stoull(f[3])}, run));
      }
      if (!doc_rows.empty()) {
        const auto& cb = codebooks.get(common.codebook_path);
        const auto cfg = make_count_config(table_count, cb);
        for (const auto& spec : doc_rows) {
          const auto f = split(spec, ',');
          if (f.size() != 3)
            throw rvw::Error(rvw::ErrorCode::invalid_input, "bad --doc '" + spec + "'");
          const auto ledger = count_file(f[2], "", cfg);
          out.push_back(rvw::make_row({f[0], std::stod(f[1]), ledger.total_bits(),
                                       ledger.total_without_inheritance()},
                                      run));
        }
      }
      std::cout << rvw::render_table(out, run);
      return kExitOk;
    }
    if (*verify) {
      std::vector<rvw::VerifyCheck> checks;
      if (check == "all" || check == "chernoff") checks.push_back(run_chernoff(vo));
      if (check == "all" || check == "coverage") checks.push_back(run_coverage(vo));
      if (check == "all" || check == "kl") checks.push_back(run_kl(vo));
      const rvw::McConfig cfg{vo.trials, vo.seed, vo.workers};
      std::cout << rvw::render_verify(checks, cfg, run.format);
      for (const auto& c : checks)
        if (!c.passed) return kExitFailed;
      return kExitOk;
    }
    if (*parse) {
      const auto& cb = codebooks.get(common.codebook_path);
      const auto doc = rvw::parse(read_file(parse_file), cb);
      if (run.format == rvw::Format::json) {
        std::cout << rvw::doc_json(doc, cb).dump(2) << "\n";
      } else {
        std::cout << rvw::roundtrip(doc, cb);
      }
      return kExitOk;
    }
  } catch (const rvw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
