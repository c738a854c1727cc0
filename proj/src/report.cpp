#include "eswm/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace eswm {

namespace {

template <typename Profile>
std::unordered_map<AgentId, const Profile*> index_by_id(std::span<const Profile> roster) {
  std::unordered_map<AgentId, const Profile*> idx;
  idx.reserve(roster.size());
  for (const auto& p : roster) idx.emplace(p.id, &p);
  return idx;
}

}  // namespace

MetricsRecord compute_metrics(const AuctionOutcome& outcome,
                              std::span<const RequesterProfile> roster_r,
                              std::span<const WorkerProfile> roster_w) {
  MetricsRecord rec;
  rec.n_requesters = roster_r.size();
  rec.n_workers = roster_w.size();
  rec.revoked = outcome.revoked;
  if (outcome.revoked || outcome.matches.empty()) return rec;

  const auto true_w = index_by_id(roster_w);
  rec.n_matches = outcome.matches.size();

  double util_r = 0.0;
  double util_w = 0.0;
  for (std::size_t k = 0; k < outcome.matches.size(); ++k) {
    const Match& m = outcome.matches[k];
    const RequesterProfile& r = outcome.winners_r[k];
    const auto it = true_w.find(m.worker);
    const WorkerProfile& w = it != true_w.end() ? *it->second : outcome.winners_w[k];

    rec.nsw += r.max_valuation - w.cost;
    rec.esw += expected_valuation(r, w) - w.cost;
    rec.platform_utility_pre += m.fee - m.payment;
    rec.platform_utility_post += m.effective_fee - m.effective_payment;

    const double achieved = m.submission ? task_valuation(r, *m.submission) : r.max_valuation;
    util_r += achieved - m.effective_fee;
    util_w += m.effective_payment - w.cost;
  }
  if (!roster_r.empty()) rec.avg_requester_utility = util_r / static_cast<double>(roster_r.size());
  if (!roster_w.empty()) rec.avg_worker_utility = util_w / static_cast<double>(roster_w.size());
  return rec;
}

double realized_welfare(const AuctionOutcome& outcome) {
  double total = 0.0;
  for (std::size_t k = 0; k < outcome.matches.size(); ++k) {
    const auto& m = outcome.matches[k];
    const auto& r = outcome.winners_r[k];
    total += task_valuation(r, m.submission.value_or(0.0)) - outcome.winners_w[k].cost;
  }
  return total;
}

AgentUtilities realized_utilities(const AuctionOutcome& outcome) {
  AgentUtilities u;
  for (std::size_t k = 0; k < outcome.matches.size(); ++k) {
    const auto& m = outcome.matches[k];
    u.requesters += task_valuation(outcome.winners_r[k], m.submission.value_or(0.0)) -
                    m.effective_fee;
    u.workers += m.effective_payment - outcome.winners_w[k].cost;
  }
  return u;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string csv_header() {
  return "nsw,esw,platform_utility_pre,platform_utility_post,avg_requester_utility,"
         "avg_worker_utility,n_matches,revoked,capacity,beta_alpha,beta_lambda,seed,"
         "mechanism,run,round,n_requesters,n_workers";
}

std::string to_csv_row(const MetricsRecord& r) {
  std::ostringstream os;
  os << format_number(r.nsw) << ',' << format_number(r.esw) << ','
     << format_number(r.platform_utility_pre) << ',' << format_number(r.platform_utility_post)
     << ',' << format_number(r.avg_requester_utility) << ','
     << format_number(r.avg_worker_utility) << ',' << r.n_matches << ',' << (r.revoked ? 1 : 0)
     << ',' << r.capacity << ',' << format_number(r.beta_alpha) << ','
     << format_number(r.beta_lambda) << ',' << r.seed << ',' << r.mechanism << ',' << r.run
     << ',' << r.round << ',' << r.n_requesters << ',' << r.n_workers;
  return os.str();
}

std::string to_csv(std::span<const MetricsRecord> records) {
  std::string out = csv_header();
  out += '\n';
  for (const auto& r : records) {
    out += to_csv_row(r);
    out += '\n';
  }
  return out;
}

void emit_csv(std::span<const MetricsRecord> records, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << to_csv(records);
  f.flush();
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::vector<MetricsRecord> parse_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) {
    throw std::runtime_error("unexpected metrics CSV header");
  }
  std::vector<MetricsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 17) throw std::runtime_error("malformed metrics CSV row: " + line);
    MetricsRecord r;
    r.nsw = std::stod(cells[0]);
    r.esw = std::stod(cells[1]);
    r.platform_utility_pre = std::stod(cells[2]);
    r.platform_utility_post = std::stod(cells[3]);
    r.avg_requester_utility = std::stod(cells[4]);
    r.avg_worker_utility = std::stod(cells[5]);
    r.n_matches = std::stoull(cells[6]);
    r.revoked = cells[7] == "1";
    r.capacity = std::stoull(cells[8]);
    r.beta_alpha = std::stod(cells[9]);
    r.beta_lambda = std::stod(cells[10]);
    r.seed = std::stoull(cells[11]);
    r.mechanism = cells[12];
    r.run = std::stoull(cells[13]);
    r.round = std::stoull(cells[14]);
    r.n_requesters = std::stoull(cells[15]);
    r.n_workers = std::stoull(cells[16]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MetricsRecord> parse_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv_text(ss.str());
}

}  // namespace eswm
