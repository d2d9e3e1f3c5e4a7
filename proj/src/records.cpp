#include "har/records.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "har/errors.hpp"

namespace har {

using json = nlohmann::json;

namespace {

json shift_to_json(const LatentShift& s) {
  json rows = json::array();
  for (const auto& a : s.per_activity) {
    rows.push_back({{"activity", a.activity},
                    {"distance", a.distance},
                    {"skipped", a.skipped}});
  }
  return json{{"overall", s.overall}, {"per_activity", rows}};
}

LatentShift shift_from_json(const json& j) {
  LatentShift s;
  s.overall = j.at("overall").get<double>();
  for (const auto& row : j.at("per_activity")) {
    ActivityShift a;
    a.activity = row.at("activity").get<int>();
    a.distance = row.at("distance").get<double>();
    a.skipped = row.at("skipped").get<bool>();
    s.per_activity.push_back(a);
  }
  return s;
}

}  // namespace

json record_to_json(const ResultRecord& r, bool deterministic) {
  json j;
  j["schema_version"] = r.schema_version;
  j["config_hash"] = r.config_hash;
  j["dataset"] = r.dataset;
  j["mode"] = r.mode;
  j["discriminator"] = r.discriminator;
  j["fold_test_subject"] = r.fold_test_subject;
  j["seed"] = r.seed;
  j["accuracy"] = r.metrics.accuracy;
  j["macro_f1"] = r.metrics.macro_f1;
  j["per_class_f1"] = r.metrics.per_class_f1;
  j["confusion"] = r.metrics.confusion;
  j["K"] = r.metrics.K;
  j["n_test_windows"] = r.metrics.n;
  if (r.has_shift_step2) j["shift_step2"] = shift_to_json(r.shift_step2);
  if (r.has_shift_step3) j["shift_step3"] = shift_to_json(r.shift_step3);
  j["best_step"] = r.best_step;
  j["best_epoch"] = r.best_epoch;
  j["best_val_macro_f1"] = r.best_val_macro_f1;
  j["skipped_pair_batches"] = r.skipped_pair_batches;
  if (!deterministic) j["train_seconds"] = r.train_seconds;
  return j;
}

ResultRecord record_from_json(const json& j) {
  ResultRecord r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != 1) {
    throw ParseError("record: unsupported schema_version " +
                     std::to_string(r.schema_version));
  }
  r.config_hash = j.at("config_hash").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.discriminator = j.at("discriminator").get<std::string>();
  r.fold_test_subject = j.at("fold_test_subject").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.metrics.accuracy = j.at("accuracy").get<double>();
  r.metrics.macro_f1 = j.at("macro_f1").get<double>();
  r.metrics.per_class_f1 = j.at("per_class_f1").get<std::vector<double>>();
  r.metrics.confusion = j.at("confusion").get<std::vector<std::int64_t>>();
  r.metrics.K = j.at("K").get<int>();
  r.metrics.n = j.at("n_test_windows").get<std::int64_t>();
  if (j.contains("shift_step2")) {
    r.shift_step2 = shift_from_json(j.at("shift_step2"));
    r.has_shift_step2 = true;
  }
  if (j.contains("shift_step3")) {
    r.shift_step3 = shift_from_json(j.at("shift_step3"));
    r.has_shift_step3 = true;
  }
  r.best_step = j.at("best_step").get<std::string>();
  r.best_epoch = j.at("best_epoch").get<int>();
  r.best_val_macro_f1 = j.at("best_val_macro_f1").get<double>();
  r.skipped_pair_batches = j.at("skipped_pair_batches").get<int>();
  if (j.contains("train_seconds")) r.train_seconds = j.at("train_seconds").get<double>();
  return r;
}

bool RecordKey::operator<(const RecordKey& o) const {
  if (mode != o.mode) return mode < o.mode;
  if (fold_test_subject != o.fold_test_subject) {
    return fold_test_subject < o.fold_test_subject;
  }
  return seed < o.seed;
}

std::string RecordKey::str() const {
  return mode + "|" + std::to_string(fold_test_subject) + "|" + std::to_string(seed);
}

RecordLog::RecordLog(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      existing_.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError("records: invalid JSON at " + file_.string() + " line " +
                       std::to_string(line_no) + ": " + e.what());
    }
  }
}

bool RecordLog::has(const RecordKey& key, const std::string& config_hash) const {
  for (const auto& j : existing_) {
    if (j.value("mode", "") == key.mode &&
        j.value("fold_test_subject", -1) == key.fold_test_subject &&
        j.value("seed", std::uint64_t{0}) == key.seed &&
        j.value("config_hash", "") == config_hash) {
      return true;
    }
  }
  return false;
}

void RecordLog::begin(const std::vector<RecordKey>& order) {
  std::lock_guard<std::mutex> lock(mu_);
  order_ = order;
  next_ = 0;
  pending_.clear();
}

void RecordLog::submit(const RecordKey& key, json record) {
  std::lock_guard<std::mutex> lock(mu_);
  pending_[key.str()] = std::move(record);
  flush_ready();
}

void RecordLog::flush_ready() {
  while (next_ < order_.size()) {
    const auto it = pending_.find(order_[next_].str());
    if (it == pending_.end()) return;
    std::filesystem::create_directories(file_.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : file_.parent_path());
    std::ofstream out(file_, std::ios::app);
    if (!out) throw std::runtime_error("records: cannot append to " + file_.string());
    out << it->second.dump() << "\n";
    existing_.push_back(it->second);
    pending_.erase(it);
    ++next_;
  }
}

void RecordLog::finish() {
  std::lock_guard<std::mutex> lock(mu_);
  if (next_ != order_.size() || !pending_.empty()) {
    throw std::runtime_error("records: run ended with unwritten records");
  }
}

AggregateStats aggregate_records(const std::vector<json>& records,
                                 const std::string& mode) {
  // fold -> (sum acc, sum f1, count) over seeds
  std::map<int, std::array<double, 3>> per_fold;
  for (const auto& j : records) {
    if (j.value("mode", "") != mode) continue;
    auto& acc = per_fold[j.at("fold_test_subject").get<int>()];
    acc[0] += j.at("accuracy").get<double>();
    acc[1] += j.at("macro_f1").get<double>();
    acc[2] += 1.0;
  }
  if (per_fold.empty()) {
    throw std::invalid_argument("aggregate_records: no records for mode " + mode);
  }
  std::vector<double> fold_acc, fold_f1;
  for (const auto& [fold, sums] : per_fold) {
    fold_acc.push_back(sums[0] / sums[2]);
    fold_f1.push_back(sums[1] / sums[2]);
  }
  return aggregate(fold_acc, fold_f1);
}

std::string format_aggregate_table(const std::string& title, const AggregateStats& stats) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << title << " (" << stats.n_folds << " folds, std over folds, sample n-1)\n";
  os << "  accuracy: " << stats.mean_accuracy << " +- " << stats.std_accuracy << "\n";
  os << "  macro_f1: " << stats.mean_macro_f1 << " +- " << stats.std_macro_f1 << "\n";
  return os.str();
}

}  // namespace har
