#include "dips/direct.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dips/errors.hpp"

namespace dips {

namespace {

constexpr std::array<std::uint64_t, kMaxLevel + 1> make_pow3() {
    std::array<std::uint64_t, kMaxLevel + 1> p{};
    p[0] = 1;
    for (int i = 1; i <= kMaxLevel; ++i) p[i] = p[i - 1] * 3;
    return p;
}

constexpr auto kPow3 = make_pow3();
constexpr std::uint64_t kFull = kPow3[kMaxLevel];
const double kUnit = 1.0 / static_cast<double>(kFull);

double unit_of(std::uint64_t v) { return static_cast<double>(v) * kUnit; }

double box_size(std::span<const int> level) {
    double s = 0.0;
    for (int l : level) {
        const double side = std::pow(3.0, -l);
        s += side * side;
    }
    return 0.5 * std::sqrt(s);
}

void finish_geometry(Hyperbox& b) {
    const std::size_t n = b.lo.size();
    b.level.assign(n, 0);
    b.center.assign(n, 0.0);
    b.level_sum = 0;
    for (std::size_t d = 0; d < n; ++d) {
        const std::uint64_t side = b.hi[d] - b.lo[d];
        int lev = 0;
        while (lev < kMaxLevel && kPow3[kMaxLevel - lev] != side) ++lev;
        b.level[d] = lev;
        b.level_sum += lev;
        b.center[d] = 0.5 * (unit_of(b.lo[d]) + unit_of(b.hi[d]));
    }
    b.size = box_size(b.level);
}

std::vector<double> unit_bounds(const Hyperbox& b, bool upper) {
    std::vector<double> v(b.lo.size());
    for (std::size_t d = 0; d < v.size(); ++d) v[d] = upper ? b.unit_hi(d) : b.unit_lo(d);
    return v;
}

}  // namespace

namespace detail {

struct PartitionAccess {
    static std::vector<Hyperbox>& boxes(Partition& p) { return p.boxes_; }
    static std::vector<LineageState>& lineages(Partition& p) { return p.lineages_; }
    static std::size_t add(Partition& p, Hyperbox b) { return p.add_box(std::move(b)); }
    static void retire(Partition& p, std::size_t id) { p.retire(id); }
    static void unselectable(Partition& p, std::size_t id) {
        const auto& b = p.boxes_[id];
        auto it = p.classes_.find(b.level_sum);
        if (it == p.classes_.end()) return;
        it->second.erase({b.value, id});
        if (it->second.empty()) p.classes_.erase(it);
    }
    static void revalue(Partition& p, std::size_t id, double value) {
        auto& b = p.boxes_[id];
        auto it = p.classes_.find(b.level_sum);
        if (it != p.classes_.end()) it->second.erase({b.value, id});
        b.value = value;
        p.classes_[b.level_sum].insert({value, id});
    }
    static void add_evals(Partition& p, std::uint64_t evals, std::uint64_t nofc) {
        p.eval_count_ += evals;
        p.nofc_ += nofc;
    }
    static void trace(Partition& p, std::size_t count) { p.append_trace(count); }
    static void set_flags(Partition& p, bool no_target, bool stable) {
        p.no_target_ = no_target;
        p.stopped_stable_ = stable;
    }
    static void record(Partition& p, DivisionRecord r) { p.divisions_.push_back(r); }
};

}  // namespace detail

using detail::PartitionAccess;

double Hyperbox::unit_lo(std::size_t d) const { return unit_of(lo[d]); }
double Hyperbox::unit_hi(std::size_t d) const { return unit_of(hi[d]); }

double Hyperbox::volume() const {
    double v = 1.0;
    for (int l : level) v *= std::pow(3.0, -l);
    return v;
}

void StopConfig::validate() const {
    if (q_stable < 1) throw UsageError("stop: q_stable must be >= 1");
    if (!(eps_M > 0.0)) throw UsageError("stop: eps_M must be > 0");
    if (max_evals < 1) throw UsageError("stop: max_evals must be >= 1");
    if (!(eps_hull >= 0.0)) throw UsageError("stop: eps_hull must be >= 0");
    if (!(beta_skip >= 0.0 && beta_skip < 1.0)) throw UsageError("stop: beta_skip must lie in [0,1)");
}

Partition::Partition(std::size_t dim, ObjectiveConfig objective, EstimatorMode mode)
    : dim_(dim), objective_(objective), mode_(mode) {
    if (dim == 0) throw UsageError("partition: dimension must be >= 1");
}

std::vector<std::size_t> Partition::leaf_ids() const {
    std::vector<std::size_t> ids;
    ids.reserve(leaf_count_);
    for (std::size_t i = 0; i < boxes_.size(); ++i)
        if (boxes_[i].leaf) ids.push_back(i);
    return ids;
}

double Partition::max_leaf_prior() const { return priors_.empty() ? 0.0 : *priors_.rbegin(); }

double Partition::leaf_volume_sum() const {
    double v = 0.0;
    for (const auto& b : boxes_)
        if (b.leaf) v += b.volume();
    return v;
}

double Partition::leaf_prior_sum() const {
    double p = 0.0;
    for (const auto& b : boxes_)
        if (b.leaf) p += b.prior;
    return p;
}

double Partition::contribution(const Hyperbox& b) const {
    if (mode_.kind == EstimatorMode::Kind::crisp) return b.distance <= mode_.m ? b.prior : 0.0;
    if (mode_.stage == EstimatorMode::npos) return b.prior * b.hit_ratio;
    if (mode_.stage >= b.stage_ratios.size()) throw UsageError("weighted estimate: box lacks stage ratios");
    return b.prior * b.stage_ratios[mode_.stage];
}

std::size_t Partition::add_box(Hyperbox b) {
    const std::size_t id = boxes_.size();
    b.created = id;
    b.leaf = true;
    running_ += contribution(b);
    classes_[b.level_sum].insert({b.value, id});
    priors_.insert(b.prior);
    ++leaf_count_;
    boxes_.push_back(std::move(b));
    return id;
}

void Partition::retire(std::size_t id) {
    auto& b = boxes_.at(id);
    if (!b.leaf) throw UsageError("divide: box is not a leaf");
    b.leaf = false;
    running_ -= contribution(b);
    if (running_ < 0.0) running_ = 0.0;
    auto it = classes_.find(b.level_sum);
    if (it != classes_.end()) {
        it->second.erase({b.value, id});
        if (it->second.empty()) classes_.erase(it);
    }
    priors_.erase(priors_.find(b.prior));
    --leaf_count_;
}

void Partition::append_trace(std::size_t count) { trace_.insert(trace_.end(), count, running_); }

std::vector<std::size_t> Partition::neighbors(std::size_t self) const {
    const auto& a = boxes_.at(self);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
        const auto& b = boxes_[i];
        if (i == self || !b.leaf) continue;
        std::size_t positive = 0;
        bool touching = true;
        for (std::size_t d = 0; d < dim_ && touching; ++d) {
            const std::uint64_t lo = std::max(a.lo[d], b.lo[d]);
            const std::uint64_t hi = std::min(a.hi[d], b.hi[d]);
            if (lo > hi) touching = false;
            else if (hi > lo) ++positive;
        }
        if (touching && positive + 1 >= dim_) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> potentially_optimal_points(std::span<const HullPoint> points, double eps_hull) {
    std::vector<std::size_t> out;
    if (points.empty()) return out;
    double fmin = std::numeric_limits<double>::infinity();
    for (const auto& p : points) fmin = std::min(fmin, p.value);
    const double target = fmin - eps_hull * std::abs(fmin);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < points.size(); ++j) {
        const auto& pj = points[j];
        double k_low = 0.0;
        double k_high = kInf;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (i == j) continue;
            const auto& pi = points[i];
            if (pi.size < pj.size) {
                k_low = std::max(k_low, (pj.value - pi.value) / (pj.size - pi.size));
            } else if (pi.size > pj.size) {
                k_high = std::min(k_high, (pi.value - pj.value) / (pi.size - pj.size));
            } else {
                throw UsageError("potentially_optimal_points: duplicate size");
            }
        }
        if (!(k_high > 0.0) || k_low > k_high) continue;
        if (k_high != kInf && pj.value - k_high * pj.size > target) continue;
        out.push_back(j);
    }
    return out;
}

std::vector<std::size_t> select_potentially_optimal(const Partition& partition, double eps_hull) {
    std::vector<HullPoint> points;
    std::vector<std::size_t> ids;
    for (const auto& [level_sum, members] : partition.size_classes()) {
        const auto id = members.begin()->second;
        points.push_back({partition.box(id).size, members.begin()->first});
        ids.push_back(id);
    }
    std::vector<std::size_t> out;
    for (auto k : potentially_optimal_points(points, eps_hull)) out.push_back(ids[k]);
    return out;
}

SkipChoice apply_skip_rule(std::span<const std::size_t> candidates, const Partition& partition, double beta_skip) {
    if (candidates.empty()) throw UsageError("apply_skip_rule: no candidates");
    const double threshold = beta_skip * partition.max_leaf_prior();
    for (auto id : candidates)
        if (partition.box(id).prior >= threshold) return {id, false};
    const auto& largest = partition.size_classes().begin()->second;
    return {largest.begin()->second, true};
}

namespace {

double objective_value(const Partition& p, const Hyperbox& b) {
    const auto& cfg = p.objective();
    switch (cfg.kind) {
        case ObjectiveKind::inner: return inner_objective(b.distance, b.density, cfg.m);
        case ObjectiveKind::mean_crude:
        case ObjectiveKind::plain: return b.distance;
        case ObjectiveKind::outer: break;
    }
    return b.distance;
}

std::vector<CentroidEval> evaluate_checked(const BatchEvaluator& evaluator, std::span<const EvalRequest> reqs) {
    auto results = evaluator(reqs);
    if (results.size() != reqs.size()) throw UsageError("evaluator returned a batch of the wrong size");
    return results;
}

// Fills a freshly evaluated box and its lineage.
void absorb(Partition& p, Hyperbox& b, const EvalRequest& req, const CentroidEval& ev, const ParameterSpace* space) {
    b.distance = ev.distance;
    b.hit_ratio = ev.hit_ratio;
    b.stage_ratios = ev.stage_ratios;
    b.density = space ? space->density(req.physical_point) : 0.0;
    auto& lineages = PartitionAccess::lineages(p);
    b.lineage = lineages.size();
    LineageState lin;
    lin.id = b.lineage;
    lin.base_distance = ev.distance;
    lin.base_ratio = ev.hit_ratio;
    if (p.objective().kind == ObjectiveKind::outer) {
        b.value = outer_objective(lin, OuterStep::first, {}, p.objective());
    } else {
        b.value = objective_value(p, b);
    }
    lineages.push_back(lin);
}

EvalRequest make_request(std::uint64_t index, const Hyperbox& b, const ParameterSpace* space) {
    EvalRequest r;
    r.eval_index = index;
    r.unit_point = b.center;
    r.physical_point = space ? space->to_physical(b.center) : b.center;
    return r;
}

}  // namespace

Partition initialize_partition(std::size_t dim, const BatchEvaluator& evaluator, const UnitPrior& prior,
                               const ParameterSpace* space, const ObjectiveConfig& objective,
                               const EstimatorMode& mode) {
    objective.validate();
    if (space && space->dim() != dim) throw UsageError("initialize_partition: dimension mismatch");
    Partition p(dim, objective, mode);
    Hyperbox root;
    root.lo.assign(dim, 0);
    root.hi.assign(dim, kFull);
    finish_geometry(root);
    root.prior = prior(unit_bounds(root, false), unit_bounds(root, true));
    const EvalRequest req = make_request(0, root, space);
    const auto results = evaluate_checked(evaluator, std::span(&req, 1));
    absorb(p, root, req, results[0], space);
    PartitionAccess::add(p, std::move(root));
    PartitionAccess::add_evals(p, 1, results[0].nofc);
    PartitionAccess::trace(p, 1);
    return p;
}

std::vector<std::size_t> divide(Partition& partition, std::size_t id, const BatchEvaluator& evaluator,
                                const UnitPrior& prior, const ParameterSpace* space, std::size_t budget) {
    const Hyperbox parent = partition.box(id);
    if (!parent.leaf) throw UsageError("divide: box is not a leaf");
    const std::size_t n = partition.dim();
    const int min_level = *std::min_element(parent.level.begin(), parent.level.end());
    if (min_level >= kMaxLevel) {
        PartitionAccess::unselectable(partition, id);
        return {};
    }
    std::vector<std::size_t> dims;
    for (std::size_t d = 0; d < n; ++d)
        if (parent.level[d] == min_level) dims.push_back(d);
    dims.resize(std::min(dims.size(), budget / 2));
    if (dims.empty()) return {};

    const std::uint64_t third = kPow3[kMaxLevel - min_level - 1];

    // Side centroids c -/+ (side/3) e_d, evaluated as one batch.
    std::vector<EvalRequest> requests;
    std::vector<Hyperbox> probes;
    for (auto d : dims) {
        for (int sign : {-1, +1}) {
            Hyperbox b;
            b.lo = parent.lo;
            b.hi = parent.hi;
            if (sign < 0) {
                b.hi[d] = parent.lo[d] + third;
            } else {
                b.lo[d] = parent.lo[d] + 2 * third;
            }
            finish_geometry(b);
            requests.push_back(make_request(partition.eval_count() + requests.size(), b, space));
            probes.push_back(std::move(b));
        }
    }
    std::vector<CentroidEval> results;
    try {
        results = evaluate_checked(evaluator, requests);
    } catch (const std::exception& e) {
        throw std::runtime_error("evaluating children of box " + std::to_string(id) + ": " + e.what());
    }
    std::uint64_t spent = 0;
    for (std::size_t k = 0; k < probes.size(); ++k) {
        absorb(partition, probes[k], requests[k], results[k], space);
        spent += results[k].nofc;
    }

    // Split best dimension first.
    std::vector<std::size_t> order(dims.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double wa = std::min(probes[2 * a].value, probes[2 * a + 1].value);
        const double wb = std::min(probes[2 * b].value, probes[2 * b + 1].value);
        return wa < wb;
    });

    DivisionRecord record{id, parent.prior, partition.max_leaf_prior(), false};
    PartitionAccess::retire(partition, id);

    std::vector<std::size_t> created;
    std::vector<std::uint64_t> cur_lo = parent.lo;
    std::vector<std::uint64_t> cur_hi = parent.hi;
    for (auto k : order) {
        const std::size_t d = dims[k];
        for (int side = 0; side < 2; ++side) {
            Hyperbox child = probes[2 * k + side];
            child.lo = cur_lo;
            child.hi = cur_hi;
            if (side == 0) {
                child.hi[d] = cur_lo[d] + third;
            } else {
                child.lo[d] = cur_lo[d] + 2 * third;
            }
            finish_geometry(child);
            child.prior = prior(unit_bounds(child, false), unit_bounds(child, true));
            created.push_back(PartitionAccess::add(partition, std::move(child)));
        }
        cur_lo[d] += third;
        cur_hi[d] = cur_lo[d] + third;
    }

    Hyperbox centre = parent;
    centre.lo = cur_lo;
    centre.hi = cur_hi;
    finish_geometry(centre);
    centre.prior = prior(unit_bounds(centre, false), unit_bounds(centre, true));
    centre.leaf = true;
    const std::size_t centre_id = PartitionAccess::add(partition, centre);
    created.push_back(centre_id);

    if (partition.objective().kind == ObjectiveKind::outer) {
        auto& lin = PartitionAccess::lineages(partition).at(parent.lineage);
        std::vector<double> ratios;
        if (lin.base_ratio > 0.0) {
            for (auto nb : partition.neighbors(centre_id)) ratios.push_back(partition.box(nb).hit_ratio);
        }
        const double value = outer_objective(lin, OuterStep::refine, ratios, partition.objective());
        PartitionAccess::revalue(partition, centre_id, value);
    }

    PartitionAccess::add_evals(partition, requests.size(), spent);
    PartitionAccess::trace(partition, requests.size());
    PartitionAccess::record(partition, record);
    return created;
}

namespace {

Partition search_loop(Partition p, const BatchEvaluator& evaluator, const UnitPrior& prior,
                      const ParameterSpace* space, const StopConfig& stop) {
    std::size_t consumed = 0;  // trace entries already examined by the stopping rule
    double anchor = 0.0;
    std::size_t stable = 0;
    bool stable_stop = false;
    auto scan_trace = [&] {
        const auto& tr = p.probability_trace();
        for (; consumed < tr.size(); ++consumed) {
            const double v = tr[consumed];
            if (anchor > 0.0 && std::abs(v - anchor) < stop.eps_M * anchor) {
                ++stable;
            } else {
                anchor = v;
                stable = 0;
            }
            if (stop.use_stability_rule && stable >= stop.q_stable) stable_stop = true;
        }
    };
    scan_trace();

    while (!stable_stop && p.eval_count() + 2 <= stop.max_evals) {
        auto candidates = select_potentially_optimal(p, stop.eps_hull);
        std::size_t progressed = 0;
        while (!candidates.empty() && !stable_stop && p.eval_count() + 2 <= stop.max_evals) {
            const auto choice = apply_skip_rule(candidates, p, stop.beta_skip);
            const double max_prior = p.max_leaf_prior();
            const double box_prior = p.box(choice.id).prior;
            const auto created =
                divide(p, choice.id, evaluator, prior, space, stop.max_evals - p.eval_count());
            if (!created.empty()) {
                ++progressed;
                auto& rec = const_cast<DivisionRecord&>(p.divisions().back());
                rec.fallback = choice.fallback;
                rec.prior = box_prior;
                rec.max_leaf_prior = max_prior;
            }
            scan_trace();
            if (choice.fallback) break;
            auto pos = std::find(candidates.begin(), candidates.end(), choice.id);
            candidates.erase(candidates.begin(), pos + 1);
        }
        if (progressed == 0 && p.size_classes().empty()) break;
    }
    PartitionAccess::set_flags(p, p.running_estimate() == 0.0, stable_stop);
    return p;
}

}  // namespace

Partition run_search(const ParameterSpace& space, const BatchEvaluator& evaluator, const StopConfig& stop,
                     const ObjectiveConfig& objective, const EstimatorMode& mode, std::uint64_t seed) {
    stop.validate();
    UnitPrior prior = [&space](std::span<const double> lo, std::span<const double> hi) {
        return space.unit_box_prior(lo, hi);
    };
    auto p = initialize_partition(space.dim(), evaluator, prior, &space, objective, mode);
    p.seed = seed;
    return search_loop(std::move(p), evaluator, prior, &space, stop);
}

Partition run_search_unit(std::size_t dim, const BatchEvaluator& evaluator, const UnitPrior& prior,
                          const StopConfig& stop, const ObjectiveConfig& objective, const EstimatorMode& mode,
                          std::uint64_t seed) {
    stop.validate();
    auto p = initialize_partition(dim, evaluator, prior, nullptr, objective, mode);
    p.seed = seed;
    return search_loop(std::move(p), evaluator, prior, nullptr, stop);
}

double estimate_probability(const Partition& partition, const EstimatorMode& mode) {
    double p = 0.0;
    for (const auto& b : partition.boxes()) {
        if (!b.leaf) continue;
        if (mode.kind == EstimatorMode::Kind::crisp) {
            if (b.distance <= mode.m) p += b.prior;
            continue;
        }
        if (mode.stage == EstimatorMode::npos) {
            p += b.prior * b.hit_ratio;
        } else {
            if (mode.stage >= b.stage_ratios.size())
                throw UsageError("estimate_probability: leaf without stage ratios");
            p += b.prior * b.stage_ratios[mode.stage];
        }
    }
    return p;
}

std::pair<double, std::vector<double>> best_point(const Partition& partition) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> at;
    for (const auto& b : partition.boxes()) {
        if (b.value < best) {
            best = b.value;
            at = b.center;
        }
    }
    return {best, at};
}

// ---------------------------------------------------------------------------
// Partition file

void write_partition(std::ostream& os, const Partition& partition, const ParameterSpace& space) {
    if (space.dim() != partition.dim()) throw UsageError("write_partition: dimension mismatch");
    os << std::setprecision(17);
    os << "# dips-partition v1\n";
    os << "# config_hash=" << (partition.config_hash.empty() ? "-" : partition.config_hash)
       << " seed=" << partition.seed << "\n";
    os << "dims " << partition.dim() << "\n";
    for (const auto& prm : space.params())
        os << "param " << prm.name << " " << prm.search_lo << " " << prm.search_hi << " " << prm.dist.describe()
           << "\n";
    const auto& obj = partition.objective();
    os << "objective " << to_string(obj.kind) << " " << obj.m << " " << obj.lambda << " " << obj.s << "\n";
    const auto& mode = partition.mode();
    os << "mode " << (mode.kind == EstimatorMode::Kind::crisp ? "crisp" : "weighted") << " " << mode.m << " "
       << (mode.stage == EstimatorMode::npos ? -1 : static_cast<long long>(mode.stage)) << "\n";
    os << "stages " << partition.stage_thresholds.size();
    for (double t : partition.stage_thresholds) os << " " << t;
    os << "\n";
    os << "evals " << partition.eval_count() << " " << partition.nofc() << "\n";
    os << "# leaf lineage lo[dims] hi[dims] value distance density prior hit_ratio n_ratios ratios...\n";
    for (auto id : partition.leaf_ids()) {
        const auto& b = partition.box(id);
        os << "leaf " << b.lineage;
        for (auto v : b.lo) os << " " << v;
        for (auto v : b.hi) os << " " << v;
        os << " " << b.value << " " << b.distance << " " << b.density << " " << b.prior << " " << b.hit_ratio << " "
           << b.stage_ratios.size();
        for (double r : b.stage_ratios) os << " " << r;
        os << "\n";
    }
}

Partition read_partition(std::istream& is) {
    std::string line;
    std::size_t dim = 0;
    ObjectiveConfig obj;
    EstimatorMode mode;
    std::vector<double> stages;
    std::uint64_t evals = 0, nofc = 0, seed = 0;
    std::string hash;
    std::vector<Hyperbox> leaves;
    std::vector<std::size_t> lineage_ids;
    bool saw_magic = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            if (line.rfind("# dips-partition v1", 0) == 0) saw_magic = true;
            const auto h = line.find("config_hash=");
            if (h != std::string::npos) {
                std::istringstream hs(line.substr(h + 12));
                std::string seed_field;
                hs >> hash >> seed_field;
                if (seed_field.rfind("seed=", 0) == 0) seed = std::stoull(seed_field.substr(5));
            }
            continue;
        }
        std::string tag;
        ls >> tag;
        if (tag == "dims") {
            ls >> dim;
        } else if (tag == "param") {
            continue;
        } else if (tag == "objective") {
            std::string kind;
            ls >> kind >> obj.m >> obj.lambda >> obj.s;
            obj.kind = objective_kind_from_string(kind);
        } else if (tag == "mode") {
            std::string kind;
            long long stage = 0;
            ls >> kind >> mode.m >> stage;
            mode.kind = kind == "crisp" ? EstimatorMode::Kind::crisp : EstimatorMode::Kind::weighted;
            mode.stage = stage < 0 ? EstimatorMode::npos : static_cast<std::size_t>(stage);
        } else if (tag == "stages") {
            std::size_t count = 0;
            ls >> count;
            stages.resize(count);
            for (auto& t : stages) ls >> t;
        } else if (tag == "evals") {
            ls >> evals >> nofc;
        } else if (tag == "leaf") {
            if (dim == 0) throw UsageError("partition file: leaf before dims");
            Hyperbox b;
            std::size_t lineage = 0, nratios = 0;
            ls >> lineage;
            b.lo.resize(dim);
            b.hi.resize(dim);
            for (auto& v : b.lo) ls >> v;
            for (auto& v : b.hi) ls >> v;
            ls >> b.value >> b.distance >> b.density >> b.prior >> b.hit_ratio >> nratios;
            b.stage_ratios.resize(nratios);
            for (auto& r : b.stage_ratios) ls >> r;
            if (!ls) throw UsageError("partition file: malformed leaf line: " + line);
            finish_geometry(b);
            b.lineage = lineage;
            leaves.push_back(std::move(b));
        } else {
            throw UsageError("partition file: unknown record '" + tag + "'");
        }
    }
    if (!saw_magic) throw UsageError("partition file: missing '# dips-partition v1' header");
    if (dim == 0) throw UsageError("partition file: missing dims");
    Partition p(dim, obj, mode);
    for (auto& b : leaves) {
        const auto lineage = b.lineage;
        const std::size_t id = PartitionAccess::add(p, std::move(b));
        PartitionAccess::boxes(p)[id].lineage = lineage;
    }
    PartitionAccess::add_evals(p, evals, nofc);
    p.seed = seed;
    p.config_hash = hash == "-" ? "" : hash;
    p.stage_thresholds = stages;
    return p;
}

PartitionHeader read_partition_header(std::istream& is) {
    PartitionHeader h;
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("param ", 0) != 0) continue;
        std::istringstream ls(line);
        std::string tag, name, dist;
        double lo = 0, hi = 0;
        ls >> tag >> name >> lo >> hi >> dist;
        h.names.push_back(name);
        h.search_lo.push_back(lo);
        h.search_hi.push_back(hi);
        h.distributions.push_back(dist);
    }
    return h;
}

}  // namespace dips
