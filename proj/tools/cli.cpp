#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>

#include "tattooed/attacks.hpp"
#include "tattooed/keying.hpp"
#include "tattooed/model_io.hpp"
#include "tattooed/stats.hpp"
#include "tattooed/unshuffle.hpp"
#include "tattooed/watermark.hpp"

namespace tattooed::cli {
namespace {

using nlohmann::json;

struct Options {
  bool json_output = false;

  std::string key_path;
  std::string model_path;
  std::string out_path;
  std::string record_path;
  std::string baseline_path;
  std::string reference_path;
  std::string payload_file;
  std::string payload_text;
  std::string layers;
  std::string a_path, b_path;
  std::string kind;
  std::string strategy = "random";
  std::string fractions;
  std::string grid;
  std::optional<std::uint64_t> seed;
  double gamma = kReferenceGamma;
  double ratio = 1.0;
  double threshold = kDefaultThreshold;
  double intensity = 0.0;
  std::size_t bins = 100;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Labels keep CLI integer seeds from colliding across purposes.
Seed synth_seed(std::uint64_t s) { return seed_from_integer("tattooed/synth", s); }
Seed attack_seed(std::uint64_t s) { return seed_from_integer("tattooed/attack", s); }

std::vector<double> parse_doubles(const std::string& list, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": not a number: '" + item + "'");
    }
  }
  if (v.empty()) throw UsageError(std::string(flag) + " must not be empty");
  return v;
}

std::vector<std::size_t> parse_layers(const std::string& list) {
  std::vector<std::size_t> sizes;
  for (double d : parse_doubles(list, "--layers")) {
    if (!(d >= 1.0) || d != std::floor(d)) throw UsageError("--layers takes positive integers");
    sizes.push_back(static_cast<std::size_t>(d));
  }
  if (sizes.size() < 2) throw UsageError("--layers needs at least two sizes");
  return sizes;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

WatermarkPayload payload_from(const Options& o) {
  if (!o.payload_file.empty()) return {read_file(o.payload_file)};
  return WatermarkPayload::from_text(o.payload_text);
}

void require_payload_choice(const Options& o) {
  if (o.payload_file.empty() == o.payload_text.empty()) {
    throw UsageError("give exactly one of --payload-file and --payload-text");
  }
}

std::string printable_or_empty(std::span<const std::uint8_t> bytes) {
  std::string s(bytes.begin(), bytes.end());
  const bool ok = std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= 0x20 && c < 0x7f; });
  return ok ? s : std::string();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void emit(const Options& o, std::ostream& out, const json& doc, const std::string& text) {
  if (o.json_output) {
    out << doc.dump() << '\n';
  } else {
    out << text;
  }
}

int cmd_keygen(const Options& o, std::ostream& out, std::ostream& err) {
  const SecretKey key = SecretKey::generate();
  save_key_file(key, o.out_path);
  err << "wrote key " << o.out_path << '\n';
  emit(o, out, {{"key_id", key.id()}, {"path", o.out_path}}, "key_id " + key.id() + '\n');
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
  const auto sizes = parse_layers(o.layers);
  const TensorContainer model = synth_model(sizes, synth_seed(*o.seed));
  save_container(model, o.out_path);
  const auto hash = content_hash(model.data());
  err << "wrote " << model.parameter_count() << " parameters to " << o.out_path << '\n';
  emit(o, out,
       {{"parameter_count", model.parameter_count()}, {"tensors", model.size()},
        {"sha256", hash}, {"path", o.out_path}},
       "parameters " + std::to_string(model.parameter_count()) + "\nsha256 " + hash + '\n');
  return kExitOk;
}

int cmd_mark(const Options& o, std::ostream& out, std::ostream& err) {
  const SecretKey key = load_key_file(o.key_path);
  const WatermarkPayload payload = payload_from(o);
  const TensorContainer model = load_container(o.model_path);
  const ParameterVector weights = flatten(model);

  const auto t0 = std::chrono::steady_clock::now();
  MarkResult result = mark(weights, key, payload, o.gamma, o.ratio);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.record.baseline.path = std::filesystem::absolute(o.model_path).string();
  result.record.created_at = utc_now();

  save_container(unflatten(result.marked, model.manifest()), o.out_path);
  save_record(result.record, o.record_path);
  err << "marked " << payload.bit_length() << " bits into " << weights.size()
      << " parameters in " << seconds << " s\n";
  emit(o, out,
       {{"payload_bits", payload.bit_length()}, {"spread_bits", result.record.spread_bits},
        {"parameter_count", weights.size()}, {"gamma", o.gamma}, {"ratio", o.ratio},
        {"seconds", seconds}, {"model", o.out_path}, {"record", o.record_path}},
       "spread_bits " + std::to_string(result.record.spread_bits) + "\nmodel " + o.out_path +
           "\nrecord " + o.record_path + '\n');
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const SecretKey key = load_key_file(o.key_path);
  const MarkRecord record = load_record(o.record_path);
  const std::string baseline_path = o.baseline_path.empty() ? record.baseline.path : o.baseline_path;
  if (baseline_path.empty()) throw UsageError("--baseline is required: the record names no baseline");
  if (record.key_id != key.id()) err << "warning: key does not match the record's key id\n";

  const ParameterVector weights = flatten(load_container(o.model_path));
  const ParameterVector baseline = flatten(load_container(baseline_path));
  const VerifyReport r = verify(weights, record, key, baseline, o.threshold);

  const double snr = r.channel_lost ? -std::numeric_limits<double>::infinity() : r.estimate.snr_db;
  json doc{{"decision", r.decision},
           {"watermark_accuracy", r.watermark_accuracy},
           {"channel_lost", r.channel_lost},
           {"snr_db", number_or_null(snr)},
           {"gain", r.channel_lost ? json(nullptr) : json(r.estimate.gain)},
           {"sigma", r.channel_lost ? json(nullptr) : json(r.estimate.sigma)},
           {"decoder_iterations", r.decoder_iterations},
           {"decoder_converged", r.decoder_converged},
           {"payload_hex", to_hex(r.extracted_payload)}};
  const std::string text_payload = printable_or_empty(r.extracted_payload);
  if (!text_payload.empty()) doc["payload_text"] = text_payload;

  std::ostringstream text;
  text << "decision " << r.decision << "\naccuracy " << r.watermark_accuracy << "\nsnr_db "
       << snr << '\n';
  if (!text_payload.empty()) text << "payload " << text_payload << '\n';
  emit(o, out, doc, text.str());
  err << (r.decision ? "watermark present\n" : "watermark not detected\n");
  return r.decision ? kExitOk : kExitNegative;
}

int cmd_attack(const Options& o, std::ostream& out, std::ostream& err) {
  const auto kind = parse_attack_kind(o.kind);
  if (!kind) throw UsageError("unknown attack kind '" + o.kind + "'");
  const TensorContainer model = load_container(o.model_path);
  const AttackSpec spec{*kind, o.intensity, attack_seed(*o.seed)};
  const TensorContainer attacked = apply_attack(model, spec);
  save_container(attacked, o.out_path);
  err << "applied " << to_string(*kind) << " to " << o.model_path << '\n';
  emit(o, out,
       {{"kind", std::string(to_string(*kind))}, {"intensity", o.intensity}, {"seed", *o.seed},
        {"path", o.out_path}},
       "wrote " + o.out_path + '\n');
  return kExitOk;
}

int cmd_unshuffle(const Options& o, std::ostream& out, std::ostream& err) {
  const UnshuffleResult r =
      unshuffle_model(load_container(o.model_path), load_container(o.reference_path));
  save_container(r.model, o.out_path);
  std::size_t moved = 0;
  for (const auto& p : r.permutations.per_layer) {
    for (std::size_t i = 0; i < p.size(); ++i) moved += p[i] != i;
  }
  err << "restored " << moved << " displaced neurons\n";
  emit(o, out, {{"layers", r.permutations.per_layer.size()}, {"moved_neurons", moved},
                {"path", o.out_path}},
       "moved_neurons " + std::to_string(moved) + '\n');
  return kExitOk;
}

int cmd_sweep_gamma(const Options& o, std::ostream& out, std::ostream&) {
  const SecretKey key = load_key_file(o.key_path);
  const WatermarkPayload payload = payload_from(o);
  const ParameterVector weights = flatten(load_container(o.model_path));
  const std::vector<double> grid =
      o.grid.empty() ? default_gamma_grid() : parse_doubles(o.grid, "--grid");
  const auto rows = gamma_sweep(weights, key, payload, grid, o.ratio);

  json doc = json::array();
  std::ostringstream csv;
  csv << "gamma,watermark_accuracy,distortion\n" << std::setprecision(10);
  for (const auto& r : rows) {
    doc.push_back({{"gamma", r.gamma}, {"watermark_accuracy", r.watermark_accuracy},
                   {"distortion", r.distortion}});
    csv << r.gamma << ',' << r.watermark_accuracy << ',' << r.distortion << '\n';
  }
  if (!o.out_path.empty()) {
    std::ofstream(o.out_path) << csv.str();
  }
  emit(o, out, {{"rows", doc}}, csv.str());
  return kExitOk;
}

int cmd_sweep_prune(const Options& o, std::ostream& out, std::ostream& err) {
  const SecretKey key = load_key_file(o.key_path);
  const MarkRecord record = load_record(o.record_path);
  const std::string baseline_path = o.baseline_path.empty() ? record.baseline.path : o.baseline_path;
  if (baseline_path.empty()) throw UsageError("--baseline is required: the record names no baseline");
  PruneStrategy strategy;
  if (o.strategy == "random") {
    strategy = PruneStrategy::kRandom;
  } else if (o.strategy == "magnitude") {
    strategy = PruneStrategy::kMagnitude;
  } else {
    throw UsageError("--strategy must be random or magnitude");
  }
  const std::vector<double> fractions =
      o.fractions.empty() ? default_pruning_fractions() : parse_doubles(o.fractions, "--fractions");

  const ParameterVector marked = flatten(load_container(o.model_path));
  const ParameterVector baseline = flatten(load_container(baseline_path));
  const auto rows =
      run_pruning_sweep(marked, record, key, baseline, fractions, attack_seed(*o.seed), strategy);

  std::ostringstream csv;
  write_pruning_csv(rows, csv);
  if (!o.out_path.empty()) {
    std::ofstream(o.out_path) << csv.str();
    err << "wrote " << o.out_path << '\n';
  }
  json doc = json::array();
  for (const auto& r : rows) {
    doc.push_back({{"fraction", r.fraction}, {"watermark_accuracy", r.watermark_accuracy},
                   {"snr_db", number_or_null(r.snr_db)}, {"decision", r.decision}});
  }
  emit(o, out, {{"rows", doc}}, csv.str());
  return kExitOk;
}

int cmd_distcheck(const Options& o, std::ostream& out, std::ostream&) {
  const ParameterVector a = flatten(load_container(o.a_path));
  const ParameterVector b = flatten(load_container(o.b_path));
  const DistributionComparison c = compare_distributions(a.values, b.values, o.bins);
  json doc{{"ks", c.ks},
           {"ks_standardized", c.ks_standardized},
           {"total_variation", c.total_variation},
           {"bins", c.bins},
           {"mean_a", c.mean_a},
           {"std_a", c.std_a},
           {"mean_b", c.mean_b},
           {"std_b", c.std_b}};
  std::ostringstream text;
  text << "ks " << c.ks << "\nks_standardized " << c.ks_standardized << "\ntotal_variation "
       << c.total_variation << "\nmean_a " << c.mean_a << "\nstd_a " << c.std_a << "\nmean_b "
       << c.mean_b << "\nstd_b " << c.std_b << '\n';
  emit(o, out, doc, text.str());
  return kExitOk;
}

int report_error(const Options& o, std::ostream& out, std::ostream& err, const std::string& kind,
                 const std::string& message, int code) {
  err << "error (" << kind << "): " << message << '\n';
  if (o.json_output) {
    out << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  }
  return code;
}

}  // namespace

int exit_code(ErrorKind kind) { return 20 + static_cast<int>(kind); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"TATTOOED spread-spectrum watermarking for model weights", "tattooed"};
  app.require_subcommand(1);
  app.add_flag("--json", o.json_output, "Print one JSON object on stdout");

  auto* keygen = app.add_subcommand("keygen", "Generate a 512-bit secret key");
  keygen->add_option("--out", o.out_path, "Key file to write")->required();

  auto* synth = app.add_subcommand("synth", "Write a Gaussian-initialised dense network");
  synth->add_option("--layers", o.layers, "Comma-separated layer sizes, inputs first")->required();
  synth->add_option("--seed", o.seed, "Initialisation seed")->required();
  synth->add_option("--out", o.out_path, "Output .tnsr")->required();

  auto* mark_cmd = app.add_subcommand("mark", "Embed a payload");
  mark_cmd->add_option("--model", o.model_path, "Baseline .tnsr")->required();
  mark_cmd->add_option("--key", o.key_path, "Secret key file")->required();
  mark_cmd->add_option("--payload-file", o.payload_file, "Payload bytes");
  mark_cmd->add_option("--payload-text", o.payload_text, "Payload as text");
  mark_cmd->add_option("--gamma", o.gamma, "Signal strength")->capture_default_str();
  mark_cmd->add_option("--ratio", o.ratio, "Fraction of parameters used")->capture_default_str();
  mark_cmd->add_option("--out", o.out_path, "Marked .tnsr")->required();
  mark_cmd->add_option("--record", o.record_path, "Mark record to write")->required();

  auto* verify_cmd = app.add_subcommand("verify", "Check a model for the watermark");
  verify_cmd->add_option("--model", o.model_path, "Suspect .tnsr")->required();
  verify_cmd->add_option("--record", o.record_path, "Mark record")->required();
  verify_cmd->add_option("--key", o.key_path, "Secret key file")->required();
  verify_cmd->add_option("--baseline", o.baseline_path, "Baseline .tnsr (default: from record)");
  verify_cmd->add_option("--threshold", o.threshold, "Decision threshold")->capture_default_str();

  auto* attack = app.add_subcommand("attack", "Apply a removal attack");
  attack->add_option("--kind", o.kind, "prune_random, prune_magnitude, perturb_gaussian, shuffle")
      ->required();
  attack->add_option("--intensity", o.intensity, "Pruning fraction or noise std");
  attack->add_option("--seed", o.seed, "Attack seed")->required();
  attack->add_option("--model", o.model_path, "Input .tnsr")->required();
  attack->add_option("--out", o.out_path, "Output .tnsr")->required();

  auto* unshuffle = app.add_subcommand("unshuffle", "Undo a neuron permutation");
  unshuffle->add_option("--model", o.model_path, "Shuffled .tnsr")->required();
  unshuffle->add_option("--reference", o.reference_path, "Model in canonical order")->required();
  unshuffle->add_option("--out", o.out_path, "Output .tnsr")->required();

  auto* sweep_gamma = app.add_subcommand("sweep-gamma", "Accuracy and distortion against gamma");
  sweep_gamma->add_option("--model", o.model_path, "Baseline .tnsr")->required();
  sweep_gamma->add_option("--key", o.key_path, "Secret key file")->required();
  sweep_gamma->add_option("--payload-file", o.payload_file, "Payload bytes");
  sweep_gamma->add_option("--payload-text", o.payload_text, "Payload as text");
  sweep_gamma->add_option("--ratio", o.ratio, "Fraction of parameters used")->capture_default_str();
  sweep_gamma->add_option("--grid", o.grid, "Comma-separated gammas (default 1e-4..9e-2)");
  sweep_gamma->add_option("--out", o.out_path, "CSV file");

  auto* sweep_prune = app.add_subcommand("sweep-prune", "Prune at increasing fractions and verify");
  sweep_prune->add_option("--model", o.model_path, "Marked .tnsr")->required();
  sweep_prune->add_option("--record", o.record_path, "Mark record")->required();
  sweep_prune->add_option("--key", o.key_path, "Secret key file")->required();
  sweep_prune->add_option("--baseline", o.baseline_path, "Baseline .tnsr (default: from record)");
  sweep_prune->add_option("--seed", o.seed, "Pruning seed")->required();
  sweep_prune->add_option("--strategy", o.strategy, "random or magnitude")->capture_default_str();
  sweep_prune->add_option("--fractions", o.fractions, "Comma-separated fractions");
  sweep_prune->add_option("--out", o.out_path, "CSV file");

  auto* distcheck = app.add_subcommand("distcheck", "Compare two weight distributions");
  distcheck->add_option("--a", o.a_path, "First .tnsr")->required();
  distcheck->add_option("--b", o.b_path, "Second .tnsr")->required();
  distcheck->add_option("--bins", o.bins, "Histogram bins")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) {
    sub->add_flag("--json", o.json_output, "Print one JSON object on stdout");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(o, out, err, "Usage", e.what(), kExitUsage);
  }

  try {
    if (*keygen) return cmd_keygen(o, out, err);
    if (*synth) return cmd_synth(o, out, err);
    if (*mark_cmd) {
      require_payload_choice(o);
      return cmd_mark(o, out, err);
    }
    if (*verify_cmd) return cmd_verify(o, out, err);
    if (*attack) return cmd_attack(o, out, err);
    if (*unshuffle) return cmd_unshuffle(o, out, err);
    if (*sweep_gamma) {
      require_payload_choice(o);
      return cmd_sweep_gamma(o, out, err);
    }
    if (*sweep_prune) return cmd_sweep_prune(o, out, err);
    if (*distcheck) return cmd_distcheck(o, out, err);
  } catch (const UsageError& e) {
    return report_error(o, out, err, "Usage", e.what(), kExitUsage);
  } catch (const Error& e) {
    return report_error(o, out, err, to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error(o, out, err, "Failure", e.what(), kExitFailure);
  }
  return kExitUsage;
}

}  // namespace tattooed::cli
