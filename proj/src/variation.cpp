#include "cospace/variation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cospace/knn.hpp"

namespace cospace {

namespace {

constexpr double kRidgeRelative = 1e-6;
constexpr double kRidgeFloor = 1e-9;

// log|S| through Cholesky. Throws when S is not positive definite, which the
// ridge rules out for covariances built in this module.
double log_det_spd(const Eigen::MatrixXd& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw DataError("hellinger: covariance is not positive definite");
    double acc = 0.0;
    const auto& factor = llt.matrixLLT();
    for (Eigen::Index i = 0; i < factor.rows(); ++i) {
        const double d = factor(i, i);
        if (!std::isfinite(d) || d <= 0.0)
            throw DataError("hellinger: covariance is not positive definite");
        acc += std::log(d);
    }
    return 2.0 * acc;
}

using IndexGroups = std::map<int, std::vector<int>>;

IndexGroups group_by_class(const detail::LabeledIndex& labeled,
                           const std::vector<Eigen::Index>& selected) {
    IndexGroups groups;
    for (Eigen::Index idx : selected) groups[labeled.classes[idx]].push_back(static_cast<int>(idx));
    return groups;
}

// Classes present in both maps, ranked by combined member count with ties by
// ascending class index, cut to the top s, then listed in ascending class
// order. Shared by top_s_classes() and the per-sample pipeline.
template <class BeforeMap, class AfterMap>
std::vector<int> rank_intersection(const BeforeMap& before, const AfterMap& after, int s) {
    if (s < 1) throw ConfigError("top_s must be >= 1");
    std::vector<std::pair<int, std::size_t>> combined;
    for (const auto& [cls, members] : before) {
        auto it = after.find(cls);
        if (it == after.end()) continue;
        combined.emplace_back(cls, members.size() + it->second.size());
    }
    std::sort(combined.begin(), combined.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    if (combined.size() > static_cast<std::size_t>(s)) combined.resize(static_cast<std::size_t>(s));
    std::vector<int> support;
    support.reserve(combined.size());
    for (const auto& [cls, count] : combined) support.push_back(cls);
    std::sort(support.begin(), support.end());
    return support;
}

// mu = (k x + sum members) / (count + k), the two-term scatter over that mean.
// Pre: count + k > 1 and members already gathered into contiguous rows.
Eigen::MatrixXd weighted_covariance(const Eigen::Ref<const Eigen::MatrixXd>& members,
                                    const Eigen::RowVectorXd& x, double k) {
    const double count = static_cast<double>(members.rows());
    const Eigen::RowVectorXd mu = (k * x + members.colwise().sum()) / (count + k);
    const Eigen::MatrixXd centered = members.rowwise() - mu;
    const Eigen::RowVectorXd query_centered = x - mu;
    Eigen::MatrixXd sigma = centered.transpose() * centered;
    if (k != 0.0) sigma.noalias() += k * (query_centered.transpose() * query_centered);
    sigma /= count + k - 1.0;
    return sigma;
}

// Ridged covariance of the given labeled members (indices into `labeled`)
// around x. `gather` is scratch for the contiguous member block.
Eigen::MatrixXd class_covariance(const detail::LabeledIndex& labeled,
                                 const std::vector<int>& members, const Eigen::RowVectorXd& x,
                                 double k, Eigen::MatrixXd& gather) {
    const Eigen::Index dim = labeled.features.cols();
    const Eigen::Index count = static_cast<Eigen::Index>(members.size());
    if (gather.cols() != dim || gather.rows() < count) gather.resize(std::max(count, gather.rows()), dim);
    for (Eigen::Index i = 0; i < count; ++i)
        gather.row(i) = labeled.features.row(members[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd sigma = weighted_covariance(gather.topRows(count), x, k);
    sigma.diagonal().array() += covariance_ridge(sigma);
    return sigma;
}

}  // namespace

double covariance_ridge(const Eigen::MatrixXd& raw_sigma) {
    const double dim = static_cast<double>(raw_sigma.rows());
    return std::max(kRidgeRelative * raw_sigma.trace() / dim, kRidgeFloor);
}

namespace detail {

LabeledIndex::LabeledIndex(const FeatureSpace& space, const Partition& partition) {
    const auto& all_ids = space.ids();
    space_rows.reserve(partition.labeled_count());
    for (Eigen::Index i = 0; i < space.size(); ++i) {
        auto it = partition.labeled().find(all_ids[static_cast<std::size_t>(i)]);
        if (it == partition.labeled().end()) continue;
        space_rows.push_back(i);
        ids.push_back(it->first);
        classes.push_back(it->second.class_index);
    }
    if (space_rows.empty()) throw DataError("labeled neighborhood: partition has no labeled samples");
    if (space_rows.size() != partition.labeled_count())
        throw DataError("labeled neighborhood: partition labels samples missing from the space");
    features.resize(static_cast<Eigen::Index>(space_rows.size()), space.dim());
    for (std::size_t i = 0; i < space_rows.size(); ++i)
        features.row(static_cast<Eigen::Index>(i)) = space.matrix().row(space_rows[i]);
}

void nearest_labeled(const LabeledIndex& labeled, const FeatureSpace& space,
                     Eigen::Index query_row, int n_max, VariationScratch& scratch) {
    if (n_max < 1) throw ConfigError("max_labeled_neighbors must be >= 1");
    const Eigen::Index pool = labeled.features.rows();
    scratch.sq_dists =
        (labeled.features.rowwise() - space.matrix().row(query_row)).rowwise().squaredNorm();
    scratch.candidates.resize(static_cast<std::size_t>(pool));
    std::iota(scratch.candidates.begin(), scratch.candidates.end(), Eigen::Index{0});
    select_k_smallest(scratch.candidates, scratch.sq_dists, labeled.ids,
                      std::min<std::size_t>(static_cast<std::size_t>(n_max),
                                            static_cast<std::size_t>(pool)));
}

std::optional<TransformationMatrix> transformation_matrix_at(
    const CoSpace& cs, const LabeledIndex& labeled_before, const LabeledIndex& labeled_after,
    Eigen::Index sample_row, const VariationParams& params, int num_classes,
    VariationScratch& scratch) {
    if (cs.before.dim() != cs.after.dim())
        throw DataError("transformation matrix: co-space sides have different dimensions");
    if (params.k_weight < 0.0) throw ConfigError("k_weight must be >= 0");

    nearest_labeled(labeled_before, cs.before, sample_row, params.max_labeled_neighbors, scratch);
    const IndexGroups groups_before = group_by_class(labeled_before, scratch.candidates);
    nearest_labeled(labeled_after, cs.after, sample_row, params.max_labeled_neighbors, scratch);
    const IndexGroups groups_after = group_by_class(labeled_after, scratch.candidates);

    const std::vector<int> support = rank_intersection(groups_before, groups_after, params.top_s);

    const Eigen::RowVectorXd x_before = cs.before.matrix().row(sample_row);
    const Eigen::RowVectorXd x_after = cs.after.matrix().row(sample_row);

    std::vector<std::pair<int, double>> rho_by_class;
    rho_by_class.reserve(support.size());
    std::vector<int> shared;
    for (int cls : support) {
        const std::vector<int>& members_before = groups_before.find(cls)->second;
        const std::vector<int>& members_after = groups_after.find(cls)->second;
        const std::vector<int>* use_before = &members_before;
        const std::vector<int>* use_after = &members_after;
        if (params.shared_members) {
            // Member indices are comparable across sides because both labeled
            // indexes walk the same aligned row order. Canonical ascending
            // order keeps the accumulation deterministic.
            std::vector<int> sorted_before = members_before;
            std::vector<int> sorted_after = members_after;
            std::sort(sorted_before.begin(), sorted_before.end());
            std::sort(sorted_after.begin(), sorted_after.end());
            shared.clear();
            std::set_intersection(sorted_before.begin(), sorted_before.end(), sorted_after.begin(),
                                  sorted_after.end(), std::back_inserter(shared));
            use_before = &shared;
            use_after = &shared;
        }
        const double effective =
            static_cast<double>(std::min(use_before->size(), use_after->size())) + params.k_weight;
        if (effective <= 1.0) continue;
        const Eigen::MatrixXd sigma_before =
            class_covariance(labeled_before, *use_before, x_before, params.k_weight, scratch.gather);
        const Eigen::MatrixXd sigma_after =
            class_covariance(labeled_after, *use_after, x_after, params.k_weight, scratch.gather);
        rho_by_class.emplace_back(cls, hellinger(sigma_before, sigma_after));
    }
    if (rho_by_class.empty()) return std::nullopt;
    return kappa_weights(rho_by_class, num_classes);
}

}  // namespace detail

ClassNeighborhood labeled_neighborhood(const FeatureSpace& space, const SampleId& sample,
                                       const Partition& partition, int max_labeled_neighbors) {
    if (partition.is_labeled(sample))
        throw DataError("labeled neighborhood: query sample '" + sample + "' is itself labeled");
    const Eigen::Index row = space.row_of(sample);
    detail::LabeledIndex labeled(space, partition);
    detail::VariationScratch scratch;
    detail::nearest_labeled(labeled, space, row, max_labeled_neighbors, scratch);
    ClassNeighborhood neighborhood;
    for (Eigen::Index idx : scratch.candidates)
        neighborhood[labeled.classes[static_cast<std::size_t>(idx)]].push_back(
            labeled.ids[static_cast<std::size_t>(idx)]);
    return neighborhood;
}

std::vector<int> top_s_classes(const ClassNeighborhood& before, const ClassNeighborhood& after,
                               int s) {
    return rank_intersection(before, after, s);
}

LocalCovariance local_covariance(const FeatureSpace& space, const SampleId& sample,
                                 const std::vector<SampleId>& members, double k_weight) {
    if (k_weight < 0.0) throw ConfigError("k_weight must be >= 0");
    if (static_cast<double>(members.size()) + k_weight <= 1.0)
        throw DataError("local covariance: needs |members| + k > 1 around sample '" + sample + "'");
    Eigen::MatrixXd gathered(static_cast<Eigen::Index>(members.size()), space.dim());
    for (std::size_t i = 0; i < members.size(); ++i)
        gathered.row(static_cast<Eigen::Index>(i)) = space.matrix().row(space.row_of(members[i]));
    const Eigen::RowVectorXd x = space.row(sample);
    Eigen::MatrixXd sigma = weighted_covariance(gathered, x, k_weight);
    sigma.diagonal().array() += covariance_ridge(sigma);

    LocalCovariance out;
    out.sigma = std::move(sigma);
    out.center_sample = sample;
    out.neighbor_count = static_cast<int>(members.size());
    out.k_weight = k_weight;
    return out;
}

double hellinger(const Eigen::MatrixXd& sigma_b, const Eigen::MatrixXd& sigma_a) {
    const Eigen::Index dim = sigma_b.rows();
    if (sigma_b.cols() != dim || sigma_a.rows() != dim || sigma_a.cols() != dim)
        throw DataError("hellinger: covariance shapes differ");
    if (dim == 0) throw DataError("hellinger: empty covariance");
    const double log_det_b = log_det_spd(sigma_b);
    const double log_det_a = log_det_spd(sigma_a);
    // Using the mean matrix instead of the sum folds the 2^{D/2} factor into
    // the determinant, so identical inputs cancel to exactly zero: (B+A)/2
    // is bitwise B when A == B, and x/4 + x/4 - x/2 == 0 in floating point.
    const double log_det_mean = log_det_spd(0.5 * (sigma_b + sigma_a));
    const double log_bc = 0.25 * log_det_b + 0.25 * log_det_a - 0.5 * log_det_mean;
    const double radicand = std::clamp(1.0 - std::exp(log_bc), 0.0, 1.0);
    return std::sqrt(radicand);
}

double hellinger(const LocalCovariance& sigma_b, const LocalCovariance& sigma_a) {
    return hellinger(sigma_b.sigma, sigma_a.sigma);
}

TransformationMatrix kappa_weights(const std::vector<std::pair<int, double>>& rho_by_class,
                                   int num_classes) {
    if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
    if (rho_by_class.empty()) throw DataError("kappa weights: empty support");
    TransformationMatrix out;
    out.diag = Eigen::VectorXd::Zero(num_classes);
    out.support.reserve(rho_by_class.size());
    std::vector<char> seen(static_cast<std::size_t>(num_classes), 0);
    double total = 0.0;
    for (const auto& [cls, rho] : rho_by_class) {
        if (cls < 0 || cls >= num_classes)
            throw DataError("kappa weights: class " + std::to_string(cls) + " out of range");
        if (seen[static_cast<std::size_t>(cls)])
            throw DataError("kappa weights: duplicate class " + std::to_string(cls));
        seen[static_cast<std::size_t>(cls)] = 1;
        if (!std::isfinite(rho))
            throw DataError("kappa weights: non-finite distance for class " + std::to_string(cls));
        const double weight = std::exp(-rho);
        out.diag[cls] = weight;
        out.support.push_back(cls);
        total += weight;
    }
    if (!(total > 0.0)) throw DataError("kappa weights: all weights underflowed");
    out.diag /= total;
    std::sort(out.support.begin(), out.support.end());
    return out;
}

std::optional<TransformationMatrix> transformation_matrix(const CoSpace& cs, const SampleId& sample,
                                                          const Partition& partition,
                                                          const VariationParams& params) {
    if (partition.is_labeled(sample))
        throw DataError("transformation matrix: sample '" + sample + "' is already labeled");
    const Eigen::Index row = cs.before.row_of(sample);
    if (cs.after.row_of(sample) != row)
        throw DataError("transformation matrix: co-space rows are not aligned");
    detail::LabeledIndex labeled_before(cs.before, partition);
    detail::LabeledIndex labeled_after(cs.after, partition);
    detail::VariationScratch scratch;
    return detail::transformation_matrix_at(cs, labeled_before, labeled_after, row, params,
                                            partition.num_classes(), scratch);
}

}  // namespace cospace
