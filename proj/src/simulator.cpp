// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>

#include "fedgmr/common.hpp"

namespace fedgmr {

namespace {

struct Tier {
  double down, up, preset;
};

// Bandwidth tiers (download/upload MB/s) with the preset density assigned to
// each tier, fastest first.
constexpr Tier kTiers[5] = {
    {20.0, 5.0, 1.0}, {10.0, 2.5, 0.5}, {4.0, 1.0, 0.2}, {2.0, 0.5, 0.1}, {1.0, 0.25, 0.05}};

std::vector<int> tier_counts(Heterogeneity h, std::size_t n) {
  double frac[5];
  switch (h) {
    case Heterogeneity::Low: {
      const double f[5] = {0.2, 0.2, 0.2, 0.2, 0.2};
      std::copy(f, f + 5, frac);
      break;
    }
    case Heterogeneity::Medium: {
      const double f[5] = {0.1, 0.1, 0.2, 0.3, 0.3};
      std::copy(f, f + 5, frac);
      break;
    }
    case Heterogeneity::High: {
      const double f[5] = {0.1, 0.1, 0.1, 0.1, 0.6};
      std::copy(f, f + 5, frac);
      break;
    }
  }
  std::vector<int> counts(5, 0);
  int assigned = 0;
  std::vector<std::pair<double, int>> rem;
  for (int t = 0; t < 5; ++t) {
    const double want = frac[t] * static_cast<double>(n);
    counts[t] = static_cast<int>(want);
    assigned += counts[t];
    rem.emplace_back(want - counts[t], t);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < static_cast<int>(n); ++assigned, ++r) {
    counts[rem[r % rem.size()].second] += 1;
  }
  return counts;
}

}  // namespace

BandwidthProfile preset_bandwidths(Heterogeneity h, std::size_t n_clients) {
  BandwidthProfile p;
  const std::vector<int> counts = tier_counts(h, n_clients);
  for (int t = 0; t < 5; ++t) {
    for (int i = 0; i < counts[t]; ++i) {
      p.clients.push_back({kTiers[t].down, kTiers[t].up, kTiers[t].preset});
    }
  }
  return p;
}

const char* heterogeneity_name(Heterogeneity h) {
  switch (h) {
    case Heterogeneity::High: return "high";
    case Heterogeneity::Medium: return "medium";
    case Heterogeneity::Low: return "low";
  }
  return "?";
}

const char* aggregator_name(Aggregator a) {
  switch (a) {
    case Aggregator::MA: return "MA";
    case Aggregator::GA: return "GA";
    case Aggregator::FA: return "FA";
  }
  return "?";
}

void validate(const SimConfig& cfg) {
  if (cfg.n_clients == 0) throw ConfigError("config: n_clients must be positive");
  if (cfg.delta_t <= 0.0) throw ConfigError("config: delta_t must be positive");
  if (cfg.total_time < 0.0) throw ConfigError("config: total_time must be >= 0");
  if (cfg.alpha < 0.0) throw ConfigError("config: alpha must be >= 0");
  if (cfg.local.steps == 0 || cfg.local.batch_size == 0) {
    throw ConfigError("config: local steps and batch size must be positive");
  }
  if (cfg.local.lr <= 0.0) throw ConfigError("config: learning rate must be positive");
  if (cfg.ladder.empty()) throw ConfigError("config: density ladder must not be empty");
  for (double r : cfg.ladder) {
    if (r <= 0.0 || r > 1.0) throw ConfigError("config: ladder densities must be in (0,1]");
  }
  if (cfg.gmr && std::find(cfg.ladder.begin(), cfg.ladder.end(), 1.0) == cfg.ladder.end()) {
    throw ConfigError("config: restoration enabled but the ladder never reaches 1.0");
  }
  if (cfg.rho_min <= 0.0 || cfg.rho_min > 1.0) throw ConfigError("config: rho_min out of range");
  if (cfg.rho_init <= 0.0 || cfg.rho_init > 1.0) throw ConfigError("config: rho_init out of range");
  if (cfg.lambda <= 0.0) throw ConfigError("config: lambda must be positive");
  if (cfg.eval_interval < 1) throw ConfigError("config: eval_interval must be >= 1");
  if (cfg.patience < 1) throw ConfigError("config: patience must be >= 1");
  if (cfg.mask_refresh_interval < 1) throw ConfigError("config: k_rest must be >= 1");
  if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0) {
    throw ConfigError("config: val_fraction must be in [0,1)");
  }
  if (cfg.use_custom_bandwidth && cfg.bandwidth.clients.size() != cfg.n_clients) {
    throw ConfigError("config: custom bandwidth profile size != n_clients");
  }
  if (cfg.stage1_max_rounds < 0) throw ConfigError("config: stage1_max_rounds must be >= 0");
  if (cfg.max_staleness < 0) throw ConfigError("config: max_staleness must be >= 0");
}

double jitter_multiplier(Rng& rng, double rate) {
  const double e = rng.exponential(rate);
  return std::exp(e - M_LN2 / rate);
}

RoundTimeBreakdown round_time(const BandwidthProfile& profile, std::size_t client, double rho,
                              const SgdOptions& local, double c0, double c1, Rng* rng) {
  if (rho <= 0.0 || rho > 1.0) throw ConfigError("round_time: density must be in (0,1]");
  const ClientLink& link = profile.clients.at(client);
  const double bytes = rho * profile.model_bytes;
  const double up_rate = std::min(link.up_MBps, profile.server_upload_MBps) * 1e6;
  const double down_rate = std::min(link.down_MBps, profile.server_upload_MBps) * 1e6;
  const bool jit = profile.jitter && rng != nullptr;
  RoundTimeBreakdown t;
  t.upload = bytes / up_rate * (jit ? jitter_multiplier(*rng, profile.jitter_rate) : 1.0);
  t.download = bytes / down_rate * (jit ? jitter_multiplier(*rng, profile.jitter_rate) : 1.0);
  t.compute = static_cast<double>(local.steps) * (c0 + c1 * rho);
  t.total = t.compute + t.upload + t.download;
  return t;
}

std::string MetricsLog::header() const {
  std::string h = "time_s,round";
  for (std::size_t i = 1; i <= n_clients; ++i) h += ",rho_" + std::to_string(i);
  h += ",global_train_loss,global_val_acc";
  for (std::size_t i = 1; i <= n_clients; ++i) h += ",subnet_acc_" + std::to_string(i);
  h += ",A_dagger,B_dagger,min_gamma,bytes_up_cum,bytes_down_cum,aggregator,seed";
  return h;
}

namespace {
void append_num(std::string& s, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  s += buf;
}
}  // namespace

std::string MetricsLog::to_csv() const {
  std::string out = header();
  out += '\n';
  for (const MetricsRow& r : rows) {
    append_num(out, r.time_s);
    out += ',';
    out += std::to_string(r.round);
    for (double x : r.rho) {
      out += ',';
      append_num(out, x);
    }
    out += ',';
    append_num(out, r.global_train_loss);
    out += ',';
    append_num(out, r.global_val_acc);
    for (double x : r.subnet_acc) {
      out += ',';
      append_num(out, x);
    }
    out += ',';
    append_num(out, r.a_dagger);
    out += ',';
    append_num(out, r.b_dagger);
    out += ',';
    out += std::to_string(r.min_gamma);
    out += ',';
    append_num(out, r.bytes_up_cum);
    out += ',';
    append_num(out, r.bytes_down_cum);
    out += ',';
    out += r.aggregator;
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

namespace {

enum EventKind : int { kUploadComplete = 0, kAggregationTick = 1, kDownloadComplete = 2 };

struct Event {
  double time;
  int kind;
  int client;
  std::uint64_t seq;
};

// Total deterministic order: (time, kind priority, client, insertion seq).
struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.client != b.client) return a.client > b.client;
    return a.seq > b.seq;
  }
};

enum class ClientStatus { Training, Uploading, Waiting, Downloading };

struct ClientRt {
  int id = -1;
  ClientStatus status = ClientStatus::Waiting;
  // Assignment frozen at dispatch; server-side density changes do not touch
  // a round in flight.
  double assigned_rho = 1.0;
  Mask mask;
  ParamVector inbox;
  ParamVector trained;
  long trained_from_round = 0;
  long dispatch_count = 0;
  long rounds_done = 0;
  double round_started_at = 0.0;
  double last_round_duration = -1.0;
  double pending_upload_bytes = 0.0;
  double rho_at_dispatch = 0.0;
  std::uint32_t epoch_at_dispatch = 0;
  bool has_downloaded = false;
  ParamVector last_dispatched;  // kept only in the optimistic value-delta mode
};

class Simulator {
public:
  explicit Simulator(const SimConfig& cfg) : cfg_(cfg) {
    validate(cfg_);
    profile_ = cfg_.use_custom_bandwidth ? cfg_.bandwidth
                                         : preset_bandwidths(cfg_.heterogeneity, cfg_.n_clients);
    profile_.jitter = cfg_.jitter;
    profile_.jitter_rate = cfg_.jitter_rate;
    profile_.model_bytes = cfg_.model_bytes;
    profile_.server_upload_MBps = cfg_.server_upload_MBps;
    sync_ = cfg_.force_sync || cfg_.aggregator != Aggregator::MA;
    setup_data();
    setup_model();
    setup_clients();
  }

  SimResult run();

private:
  void setup_data();
  void setup_model();
  void setup_clients();

  void schedule(double time, int kind, int client) {
    queue_.push({time, kind, client, seq_++});
  }

  void handle_download_complete(const Event& ev);
  void handle_upload_complete(const Event& ev);
  void do_aggregation(double now);
  void run_gmr(const std::vector<double>& subnet_acc, double global_acc);
  void refresh_or_rebuild_masks();
  void dispatch_waiting(double now);

  double bytes_per_scalar() const {
    return profile_.model_bytes / static_cast<double>(spec_.n_coords);
  }

  SimConfig cfg_;
  BandwidthProfile profile_;
  bool sync_ = false;

  ModelSpec spec_;
  DataShard train_all_;
  DataShard val_;
  std::vector<DataShard> shards_;

  ParamVector w_;
  ParamVector w_last_refresh_;
  ImportanceVector scores_;
  MaskSet mask_set_;
  std::uint32_t epoch_ = 1;

  DensityVector rho_;
  EsmState esm_{EsmOptions{}};
  StageTracker stage_tracker_{StageTransitionOptions{}};

  Buffer buffer_;
  std::vector<ClientRt> clients_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t seq_ = 0;
  long round_ = 0;  // aggregation tick counter, 1-based once running
  double bytes_up_cum_ = 0.0;
  double bytes_down_cum_ = 0.0;
  long uploads_seen_ = 0;
  long buffer_inserts_ = 0;

  MetricsLog log_;
};

void Simulator::setup_data() {
  DataShard full;
  if (!cfg_.csv_path.empty()) {
    full = read_csv(cfg_.csv_path);
  } else if (!cfg_.idx_images.empty()) {
    full = read_idx(cfg_.idx_images, cfg_.idx_labels);
  } else {
    Rng rng(Rng::derive(cfg_.seed, {rng_tag::kData}));
    full = make_gaussian_mixture(cfg_.data.n_samples, cfg_.data.dim, cfg_.data.n_classes,
                                 cfg_.data.separation, cfg_.data.noise_sigma, rng);
  }
  Rng split_rng(Rng::derive(cfg_.seed, {rng_tag::kValSplit}));
  TrainValSplit split = split_train_val(full, cfg_.val_fraction, split_rng);
  train_all_ = std::move(split.train);
  val_ = std::move(split.val);

  Rng part_rng(Rng::derive(cfg_.seed, {rng_tag::kPartition}));
  shards_ = partition(train_all_, cfg_.n_clients, cfg_.partition_scheme, cfg_.dirichlet_alpha,
                      part_rng);
  if (!cfg_.local.with_replacement) {
    for (const DataShard& s : shards_) {
      if (s.size() < cfg_.local.batch_size) {
        throw ConfigError("config: a shard is smaller than the batch size");
      }
    }
  }
}

void Simulator::setup_model() {
  int n_classes = 0;
  for (int y : train_all_.labels) n_classes = std::max(n_classes, y + 1);
  for (int y : val_.labels) n_classes = std::max(n_classes, y + 1);
  if (cfg_.model_kind == ModelKind::Logistic) {
    spec_ = ModelSpec::logistic(train_all_.dim, n_classes);
  } else {
    spec_ = ModelSpec::mlp(train_all_.dim, cfg_.hidden_dims, n_classes);
  }
  Rng rng(Rng::derive(cfg_.seed, {rng_tag::kInit}));
  w_ = init_params(spec_, rng);
  w_last_refresh_ = w_;
  scores_ = magnitude_importance(w_);
}

void Simulator::setup_clients() {
  clients_.resize(cfg_.n_clients);
  std::map<int, double> densities;
  for (std::size_t i = 0; i < cfg_.n_clients; ++i) {
    clients_[i].id = static_cast<int>(i);
    double r;
    if (!cfg_.gmr) {
      r = profile_.clients[i].preset_density;
    } else if (cfg_.stage1_max_rounds == 0) {
      r = snap_up(profile_.clients[i].preset_density, cfg_.ladder);
    } else {
      r = cfg_.rho_init;
    }
    densities[static_cast<int>(i)] = r;
  }
  rho_.rho = densities;
  rho_.stage = (cfg_.gmr && cfg_.stage1_max_rounds > 0) ? Stage::Stage1 : Stage::Stage2;

  esm_ = EsmState(EsmOptions{cfg_.eval_interval, cfg_.patience, cfg_.tol});
  stage_tracker_ =
      StageTracker(StageTransitionOptions{cfg_.eps_stab, cfg_.w_stab, cfg_.stage1_max_rounds});
  mask_set_ = extract_masks(scores_, densities, 0, epoch_);
  for (std::size_t i = 0; i < cfg_.n_clients; ++i) {
    clients_[i].mask = mask_set_.masks.at(static_cast<int>(i));
    clients_[i].assigned_rho = densities.at(static_cast<int>(i));
  }
}

void Simulator::handle_download_complete(const Event& ev) {
  ClientRt& c = clients_[static_cast<std::size_t>(ev.client)];
  c.status = ClientStatus::Training;

  // dispatch_count was bumped at dispatch; per-round streams use the
  // 0-based round index so oracles can replay them.
  const std::uint64_t round_idx = static_cast<std::uint64_t>(c.dispatch_count - 1);
  Rng rng(Rng::derive(cfg_.seed, {rng_tag::kTrain, static_cast<std::uint64_t>(c.id), round_idx}));
  c.trained = masked_sgd_steps(c.inbox, c.mask, spec_, shards_[static_cast<std::size_t>(c.id)],
                               cfg_.local, rng);

  const double compute = static_cast<double>(cfg_.local.steps) *
                         (cfg_.compute_c0 + cfg_.compute_c1 * c.assigned_rho);
  const double up_bytes = static_cast<double>(c.mask.popcount()) * bytes_per_scalar();
  const double up_rate = std::min(profile_.clients[static_cast<std::size_t>(c.id)].up_MBps,
                                  profile_.server_upload_MBps) *
                         1e6;
  double mult = 1.0;
  if (profile_.jitter) {
    Rng jrng(Rng::derive(cfg_.seed, {rng_tag::kJitterUp, static_cast<std::uint64_t>(c.id),
                                     round_idx}));
    mult = jitter_multiplier(jrng, profile_.jitter_rate);
  }
  c.pending_upload_bytes = up_bytes;
  c.status = ClientStatus::Uploading;
  schedule(ev.time + compute + up_bytes / up_rate * mult, kUploadComplete, c.id);
}

void Simulator::handle_upload_complete(const Event& ev) {
  ClientRt& c = clients_[static_cast<std::size_t>(ev.client)];
  UploadRecord rec;
  rec.client_id = c.id;
  rec.model = c.trained;
  rec.mask = c.mask;
  rec.trained_from_round = c.trained_from_round;
  rec.arrival_time = ev.time;
  buffer_.insert(std::move(rec));
  buffer_inserts_ += 1;
  uploads_seen_ += 1;
  bytes_up_cum_ += c.pending_upload_bytes;
  c.rounds_done += 1;
  c.last_round_duration = ev.time - c.round_started_at;
  c.status = ClientStatus::Waiting;

  if (sync_) {
    const bool all_waiting =
        std::all_of(clients_.begin(), clients_.end(),
                    [](const ClientRt& x) { return x.status == ClientStatus::Waiting; });
    if (all_waiting) do_aggregation(ev.time);
  }
}

void Simulator::run_gmr(const std::vector<double>& subnet_acc, double global_acc) {
  if (rho_.stage == Stage::Stage1) {
    RoundTimeObs obs;
    double t_ref = 0.0;
    for (const ClientRt& c : clients_) {
      if (c.last_round_duration > 0.0) {
        obs.t[c.id] = c.last_round_duration;
        t_ref = (t_ref == 0.0) ? c.last_round_duration : std::min(t_ref, c.last_round_duration);
      }
    }
    // Update only once every client has produced a full-round observation.
    if (obs.t.size() == cfg_.n_clients) {
      obs.t_ref = t_ref;
      const DensityVector before = rho_;
      rho_ = stage1_update(rho_, obs, cfg_.lambda, cfg_.rho_min);
      if (stage_tracker_.observe(before, rho_)) {
        rho_ = to_stage2(rho_, cfg_.ladder);
      }
    }
  } else if (esm_.due(round_)) {
    std::map<int, bool> saturated;
    for (const ClientRt& c : clients_) {
      const double metric = cfg_.esm_metric == EsmMetric::SubnetValAcc
                                ? subnet_acc[static_cast<std::size_t>(c.id)]
                                : global_acc;
      saturated[c.id] = esm_.check(c.id, metric) == EsmVerdict::Saturated;
    }
    rho_ = gmr_step(rho_, esm_, saturated, cfg_.ladder);
  }
}

void Simulator::refresh_or_rebuild_masks() {
  if (refresh_due(round_, cfg_.mask_refresh_interval)) {
    scores_ = importance(w_, w_last_refresh_);
    w_last_refresh_ = w_;
    epoch_ += 1;
    mask_set_ = extract_masks(scores_, rho_.rho, round_, epoch_);
  } else {
    rebuild_masks(mask_set_, rho_.rho);
    mask_set_.built_at_round = round_;
  }
}

void Simulator::dispatch_waiting(double now) {
  IncrementSet inc;
  if (cfg_.ims) inc = split(w_, mask_set_);

  for (ClientRt& c : clients_) {
    if (c.status != ClientStatus::Waiting) continue;
    const std::size_t i = static_cast<std::size_t>(c.id);
    const double rho_new = rho_.rho.at(c.id);
    const Mask& mask_new = mask_set_.masks.at(c.id);
    const ParamVector sub = cfg_.ims ? reconstruct(inc, c.id) : masked(w_, mask_new);

    const std::size_t keep_new = mask_new.popcount();
    double bytes;
    if (!cfg_.ims) {
      bytes = static_cast<double>(keep_new) * bytes_per_scalar();
    } else {
      const bool same_epoch = c.has_downloaded && c.epoch_at_dispatch == epoch_;
      if (cfg_.ims_value_delta && same_epoch && rho_new >= c.rho_at_dispatch) {
        // Optimistic mode: only coordinates whose value changed since the
        // client's last download, as sparse pairs.
        std::size_t changed = 0;
        for (std::size_t n = 0; n < spec_.n_coords; ++n) {
          if (mask_new.bits[n]) {
            const double prev = n < c.last_dispatched.size() ? c.last_dispatched.v[n] : 0.0;
            if (prev != sub.v[n]) ++changed;
          }
        }
        bytes = static_cast<double>(changed) * (bytes_per_scalar() + 4.0) + 8.0;
      } else if (same_epoch && rho_new > c.rho_at_dispatch) {
        // Restoration within an epoch: transmit only the newly added
        // parameters, as sparse (index, value) pairs.
        const std::size_t keep_old = mask_set_.derive(c.rho_at_dispatch).popcount();
        bytes = static_cast<double>(keep_new - keep_old) * (bytes_per_scalar() + 4.0) + 8.0;
      } else {
        bytes = static_cast<double>(keep_new) * bytes_per_scalar();
      }
    }

    c.assigned_rho = rho_new;
    c.mask = mask_new;
    c.inbox = sub;
    if (cfg_.ims_value_delta) c.last_dispatched = sub;
    c.has_downloaded = true;
    c.rho_at_dispatch = rho_new;
    c.epoch_at_dispatch = epoch_;
    c.trained_from_round = round_ + 1;
    const std::uint64_t round_idx = static_cast<std::uint64_t>(c.dispatch_count);
    c.dispatch_count += 1;
    c.status = ClientStatus::Downloading;
    c.round_started_at = now;
    bytes_down_cum_ += bytes;

    const double down_rate =
        std::min(profile_.clients[i].down_MBps, profile_.server_upload_MBps) * 1e6;
    double mult = 1.0;
    if (profile_.jitter) {
      Rng jrng(Rng::derive(cfg_.seed, {rng_tag::kJitterDown, static_cast<std::uint64_t>(c.id),
                                       round_idx}));
      mult = jitter_multiplier(jrng, profile_.jitter_rate);
    }
    schedule(now + bytes / down_rate * mult, kDownloadComplete, c.id);
  }
}

void Simulator::do_aggregation(double now) {
  round_ += 1;

  if (cfg_.max_staleness > 0) buffer_.expire(round_, cfg_.max_staleness);

  switch (cfg_.aggregator) {
    case Aggregator::MA:
      w_ = buff_mask_fedavg(buffer_, w_, round_, cfg_.alpha);
      break;
    case Aggregator::GA:
      w_ = aggregate_ga(buffer_, w_, cfg_.n_clients);
      break;
    case Aggregator::FA:
      if (!buffer_.empty()) w_ = aggregate_fa(buffer_, cfg_.n_clients);
      break;
  }
  if (!cfg_.buffer) buffer_.clear();

  const EvalResult train_eval = evaluate(w_, spec_, train_all_);
  const double val_acc = val_.size() > 0 ? accuracy(w_, spec_, val_) : 0.0;
  std::vector<double> subnet_acc(cfg_.n_clients, 0.0);
  if (val_.size() > 0) {
    for (const ClientRt& c : clients_) {
      subnet_acc[static_cast<std::size_t>(c.id)] = accuracy(masked(w_, c.mask), spec_, val_);
    }
  }

  if (cfg_.gmr) run_gmr(subnet_acc, val_acc);
  refresh_or_rebuild_masks();
  const CoverageStats cov = coverage_stats(mask_set_);

  dispatch_waiting(now);

  MetricsRow row;
  row.time_s = now;
  row.round = round_;
  row.rho.resize(cfg_.n_clients);
  for (const auto& [client, r] : rho_.rho) row.rho[static_cast<std::size_t>(client)] = r;
  row.global_train_loss = train_eval.loss;
  row.global_val_acc = val_acc;
  row.subnet_acc = subnet_acc;
  row.a_dagger = cov.a_dagger;
  row.b_dagger = cov.b_dagger;
  row.min_gamma = cov.min_gamma;
  row.bytes_up_cum = bytes_up_cum_;
  row.bytes_down_cum = bytes_down_cum_;
  row.aggregator = aggregator_name(cfg_.aggregator);
  row.seed = cfg_.seed;
  log_.rows.push_back(std::move(row));
}

SimResult Simulator::run() {
  log_.n_clients = cfg_.n_clients;
  schedule(0.0, kAggregationTick, -1);

  while (!queue_.empty()) {
    const Event ev = queue_.top();
    queue_.pop();
    if (ev.time > cfg_.total_time) break;
    switch (ev.kind) {
      case kUploadComplete:
        handle_upload_complete(ev);
        break;
      case kAggregationTick: {
        do_aggregation(ev.time);
        if (!sync_) {
          const double next = static_cast<double>(round_) * cfg_.delta_t;
          if (next <= cfg_.total_time) schedule(next, kAggregationTick, -1);
        }
        break;
      }
      case kDownloadComplete:
        handle_download_complete(ev);
        break;
    }
  }

  SimResult res;
  res.log = std::move(log_);
  res.final_model = w_;
  res.final_scores = scores_;
  res.spec = spec_;
  res.final_rho.resize(cfg_.n_clients);
  res.client_rounds.resize(cfg_.n_clients);
  for (const ClientRt& c : clients_) {
    res.final_rho[static_cast<std::size_t>(c.id)] = rho_.rho.at(c.id);
    res.client_rounds[static_cast<std::size_t>(c.id)] = c.rounds_done;
  }
  res.uploads = uploads_seen_;
  res.buffer_inserts = buffer_inserts_;
  res.train = train_all_;
  res.val = val_;
  return res;
}

}  // namespace

SimResult run_simulation(const SimConfig& cfg) {
  Simulator sim(cfg);
  return sim.run();
}

}  // namespace fedgmr
