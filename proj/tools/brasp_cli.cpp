// Command-line front end. State lives in $BRASP_STATE_DIR (default ./.brasp).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "brasp/analysis.hpp"
#include "brasp/bench.hpp"
#include "brasp/error.hpp"
#include "brasp/harness.hpp"
#include "brasp/script.hpp"

namespace fs = std::filesystem;
using namespace brasp;

namespace {

fs::path state_dir() {
  const char* env = std::getenv("BRASP_STATE_DIR");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".brasp");
}

fs::path state_file() { return state_dir() / "state.bin"; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

Deployment load_state() {
  if (!fs::exists(state_file())) throw IoError("no state at " + state_file().string() + "; run keygen");
  std::string data = read_file(state_file());
  return Deployment::load(ByteView(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

void save_state(const Deployment& d) {
  Bytes b = d.save();
  write_file(state_file(), std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
  write_file(state_dir() / "transcript.jsonl", d.transcript().to_jsonl());
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (const std::string& t : split(s, ',')) out.push_back(std::stoull(t));
  return out;
}

// Public parameters from the first setup envelope addressed to a server.
PublicParams params_from_transcript(const Transcript& t) {
  for (const Envelope& e : t.envelopes()) {
    if (e.phase == Phase::kSetup && e.receiver != ActorId::kClient) {
      ByteReader r(e.payload);
      return read_params(r);
    }
  }
  throw IoError("transcript has no setup envelope");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-server Boolean range query engine"};
  app.require_subcommand(1);

  auto* keygen = app.add_subcommand("keygen", "generate keys and a fresh deployment");
  unsigned bits = 2048;
  std::uint64_t seed = 1;
  unsigned order = 3;
  unsigned slot_bits = 16;
  std::vector<double> box;
  bool manual_shuffle = false;
  keygen->add_option("--bits", bits, "Paillier modulus bits (512, 1024, 2048)")->capture_default_str();
  keygen->add_option("--seed", seed, "deterministic seed")->capture_default_str();
  keygen->add_option("--order", order, "Hilbert curve order")->capture_default_str();
  keygen->add_option("--slot-bits", slot_bits, "bits per packed bitmap slot")->capture_default_str();
  keygen->add_option("--box", box, "coordinate box x1 y1 x2 y2")->expected(4);
  keygen->add_flag("--manual-shuffle", manual_shuffle, "do not shuffle after build and searches");

  auto* ingest = app.add_subcommand("ingest", "load objects (JSON lines) at the data owner");
  std::string ingest_path;
  ingest->add_option("file", ingest_path, "objects, one JSON object per line")->required();

  app.add_subcommand("build", "build and distribute the encrypted indexes");
  app.add_subcommand("shuffle", "run one index-shuffle round");

  auto* query = app.add_subcommand("query", "search, redistribute and shuffle");
  std::vector<double> rect;
  std::string intervals;
  std::string keywords;
  std::string mode = "corrected";
  query->add_option("--rect", rect, "x1 y1 x2 y2")->expected(4);
  query->add_option("--intervals", intervals, "Hilbert intervals lo-hi,lo-hi");
  query->add_option("--keywords", keywords, "comma-separated keywords");
  query->add_option("--mode", mode, "corrected or literal")->check(CLI::IsMember({"corrected", "literal"}));

  auto* update = app.add_subcommand("update", "insert one object");
  std::string update_path;
  update->add_option("file", update_path, "object JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "run a JSON script in a fresh deployment");
  std::string script_path;
  std::string transcript_out;
  bool keep = false;
  simulate->add_option("script", script_path, "script JSON")->required();
  simulate->add_option("--transcript", transcript_out, "write the transcript (JSON lines) here");
  simulate->add_flag("--save", keep, "store the final state in the state directory");

  auto* bench = app.add_subcommand("bench", "benchmark suite, CSV on stdout or --out");
  BenchOptions bo;
  std::string ns, ms, mqs, wos, bench_out;
  bench->add_option("suite", bo.suite, "build, token, search, shuffle, update or all")
      ->check(CLI::IsMember(bench_suites()));
  bench->add_option("--n", ns, "object counts, comma-separated");
  bench->add_option("--m", ms, "vocabulary sizes, comma-separated");
  bench->add_option("--mq", mqs, "query keyword counts, comma-separated");
  bench->add_option("--wo", wos, "update keyword counts, comma-separated");
  bench->add_option("--reps", bo.reps, "repetitions per point")->capture_default_str();
  bench->add_option("--bits", bo.paillier_bits, "Paillier modulus bits")->capture_default_str();
  bench->add_option("--seed", bo.seed, "base seed")->capture_default_str();
  bench->add_option("--out", bench_out, "CSV file");

  auto* analyze = app.add_subcommand("analyze", "linkage report over a transcript");
  std::string transcript_in;
  std::string observer = "CS1";
  std::string history_path;
  analyze->add_option("transcript", transcript_in, "transcript JSON lines")->required();
  analyze->add_option("--observer", observer, "CS1 or CS2")->check(CLI::IsMember({"CS1", "CS2"}));
  analyze->add_option("--history", history_path,
                      "ground-truth query identities, one line per query token");

  CLI11_PARSE(app, argc, argv);

  try {
    if (keygen->parsed()) {
      HarnessConfig cfg;
      cfg.seed = seed;
      cfg.paillier_bits = bits;
      cfg.slot_bits = slot_bits;
      cfg.grid = box.empty() ? GridSpec::unit_cells(order)
                             : GridSpec::make(box[0], box[1], box[2], box[3], order);
      cfg.auto_shuffle = !manual_shuffle;
      Deployment d(cfg);
      save_state(d);
      std::cout << "keys generated: paillier " << bits << " bits, group "
                << d.params().group.name() << ", " << d.params().packing.slots_per_chunk
                << " slots per ciphertext\n";
    } else if (ingest->parsed()) {
      Deployment d = load_state();
      auto objects = parse_objects_jsonl(read_file(ingest_path), d.config().grid);
      d.ingest(objects);
      save_state(d);
      std::cout << "ingested " << objects.size() << " objects (" << d.owner().db.size()
                << " total)\n";
    } else if (app.got_subcommand("build")) {
      Deployment d = load_state();
      d.build();
      save_state(d);
      std::cout << "built indexes over " << d.object_count() << " objects, epoch " << d.epoch()
                << "\n";
    } else if (app.got_subcommand("shuffle")) {
      Deployment d = load_state();
      d.shuffle();
      save_state(d);
      std::cout << "epoch " << d.epoch() << "\n";
    } else if (query->parsed()) {
      Deployment d = load_state();
      const GridSpec& grid = d.config().grid;
      BooleanRangeQuery q;
      q.keywords = split(keywords, ',');
      if (!intervals.empty()) {
        std::vector<Interval> ivs;
        for (const std::string& part : split(intervals, ',')) {
          auto dash = part.find('-');
          if (dash == std::string::npos) throw InvalidArgument("interval must be lo-hi");
          ivs.push_back({std::stoull(part.substr(0, dash)), std::stoull(part.substr(dash + 1))});
        }
        q.range = SpatialRange::from_intervals(std::move(ivs), grid.bits());
      } else if (rect.size() == 4) {
        q.range = region_to_intervals(Rect{rect[0], rect[1], rect[2], rect[3]}, grid);
      } else {
        throw InvalidArgument("query needs --rect or --intervals");
      }
      QueryOutcome out = d.query(q, mode == "literal" ? ResultMode::kLiteral : ResultMode::kCorrected);
      d.redistribute();
      save_state(d);
      std::cout << outcome_to_json(out) << "\n";
    } else if (update->parsed()) {
      Deployment d = load_state();
      SpatioTextualObject obj = parse_object_json(read_file(update_path), d.config().grid);
      d.update(obj);
      save_state(d);
      std::cout << "inserted object " << d.object_count() - 1 << "\n";
    } else if (simulate->parsed()) {
      Script s = parse_script(read_file(script_path));
      Deployment d(s.config);
      for (const ScriptAction& a : s.actions) {
        ActionResult r = apply_action(d, a);
        if (r.outcome) std::cout << outcome_to_json(*r.outcome) << "\n";
      }
      if (!transcript_out.empty()) write_file(transcript_out, d.transcript().to_jsonl());
      if (keep) save_state(d);
    } else if (bench->parsed()) {
      if (!ns.empty()) bo.ns = parse_sizes(ns);
      if (!ms.empty()) bo.ms = parse_sizes(ms);
      if (!mqs.empty()) bo.mqs = parse_sizes(mqs);
      if (!wos.empty()) bo.wos = parse_sizes(wos);
      std::ofstream file;
      if (!bench_out.empty()) {
        file.open(bench_out, std::ios::trunc);
        if (!file) throw IoError("cannot write " + bench_out);
      }
      std::ostream& out = bench_out.empty() ? std::cout : file;
      out << bench_csv_header() << "\n";
      run_bench(bo, [&](const BenchRecord& r) { out << to_csv(r) << "\n" << std::flush; });
    } else if (analyze->parsed()) {
      Transcript t = Transcript::from_jsonl(read_file(transcript_in));
      PublicParams params = params_from_transcript(t);
      ActorId who = actor_from_string(observer);
      std::size_t tokens = 0;
      for (const Envelope& e : t.envelopes()) {
        if (e.phase == Phase::kQueryToken && e.receiver == who) ++tokens;
      }
      std::vector<std::string> keys;
      if (!history_path.empty()) {
        std::istringstream in(read_file(history_path));
        std::string line;
        while (std::getline(in, line)) keys.push_back(line);
      } else {
        for (std::size_t i = 0; i < tokens; ++i) keys.push_back("q" + std::to_string(i));
      }
      std::cout << adversary_linkage(t, who, keys, params).to_json() << "\n";
    }
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return 2;
  } catch (const CryptoError& e) {
    std::cerr << "crypto error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
