#include "cospace/propagation.hpp"

#include <atomic>
#include <cmath>
#include <ostream>

#include "cospace/parallel.hpp"

namespace cospace {

SoftLabels::SoftLabels(std::vector<SampleId> ids, Eigen::MatrixXd rows,
                       std::vector<char> labeled_mask, int iterations_run)
    : ids_(std::move(ids)),
      rows_(std::move(rows)),
      labeled_mask_(std::move(labeled_mask)),
      iterations_run_(iterations_run) {
    index_.reserve(ids_.size());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(ids_.size()); ++i) {
        index_.emplace(ids_[i], i);
    }
}

Eigen::Index SoftLabels::row_of(const SampleId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("soft labels: unknown sample id '" + id + "'");
    return it->second;
}

bool SoftLabels::is_unreached(const SampleId& id) const {
    return rows_.row(row_of(id)).sum() < kReachFloor;
}

std::optional<Eigen::VectorXd> SoftLabels::normalized_row(const SampleId& id) const {
    const Eigen::RowVectorXd r = rows_.row(row_of(id));
    const double sum = r.sum();
    if (sum < kReachFloor) return std::nullopt;
    return Eigen::VectorXd(r.transpose() / sum);
}

void SoftLabels::dump(std::ostream& out) const {
    for (Eigen::Index i = 0; i < size(); ++i) {
        out << ids_[i];
        for (int c = 0; c < num_classes(); ++c) {
            out << '\t' << format_double(rows_(i, c));
        }
        out << '\n';
    }
}

SoftLabels propagate(const TransitionMatrix& p, const std::vector<SampleId>& ids,
                     const Partition& partition, int iterations, double stop_tol, int threads) {
    const Eigen::Index n = p.size();
    if (static_cast<Eigen::Index>(ids.size()) != n) {
        throw DataError("propagate: id list does not match transition matrix size");
    }
    if (partition.total() != ids.size()) {
        throw DataError("propagate: partition covers " + std::to_string(partition.total()) +
                        " samples, transition matrix " + std::to_string(n));
    }
    if (iterations < 0) throw ConfigError("propagate: iteration count must be >= 0");
    const int m = partition.num_classes();

    Eigen::MatrixXd current = Eigen::MatrixXd::Zero(n, m);
    std::vector<char> labeled_mask(n, 0);
    std::vector<Eigen::Index> unlabeled_rows;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (partition.is_labeled(ids[i])) {
            labeled_mask[i] = 1;
            current(i, partition.class_of(ids[i])) = 1.0;
        } else if (partition.unlabeled().count(ids[i]) != 0) {
            unlabeled_rows.push_back(i);
        } else {
            throw DataError("propagate: sample '" + ids[i] + "' missing from partition");
        }
    }

    // Clamped rows never change, so only unlabeled rows are recomputed; this
    // matches the dense multiply-then-clamp exactly.
    Eigen::MatrixXd next = current;
    int ran = 0;
    for (int t = 0; t < iterations; ++t) {
        std::atomic<bool> converged{true};
        parallel_for(unlabeled_rows.size(), threads, [&](std::size_t begin, std::size_t end) {
            bool chunk_converged = true;
            for (std::size_t u = begin; u < end; ++u) {
                const Eigen::Index i = unlabeled_rows[u];
                Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(m);
                for (std::size_t pos = p.row_begin(i); pos < p.row_end(i); ++pos) {
                    acc.noalias() += p.value(pos) * current.row(p.col(pos));
                }
                if (stop_tol > 0.0 && chunk_converged) {
                    if ((acc - current.row(i)).cwiseAbs().maxCoeff() > stop_tol) {
                        chunk_converged = false;
                    }
                }
                next.row(i) = acc;
            }
            if (!chunk_converged) converged.store(false, std::memory_order_relaxed);
        });
        std::swap(current, next);
        ran = t + 1;
        if (stop_tol > 0.0 && converged.load()) break;
    }

    return SoftLabels(ids, std::move(current), std::move(labeled_mask), ran);
}

std::pair<SoftLabels, SoftLabels> intrinsic_variation(const CoSpace& cs, const Partition& partition,
                                                      const PropagationParams& params) {
    if (cs.before.dim() != cs.after.dim()) {
        throw DataError("intrinsic variation: co-space sides have different dimensions (" +
                        std::to_string(cs.before.dim()) + " vs " + std::to_string(cs.after.dim()) +
                        "); reduce first");
    }
    auto run_side = [&](const FeatureSpace& side) {
        KnnIndex knn = build_knn(side, params.knn, params.threads);
        TransitionMatrix p = build_transition(side, knn, params.mu, params.delta);
        return propagate(p, side.ids(), partition, params.iterations, params.stop_tol,
                         params.threads);
    };
    SoftLabels before = run_side(cs.before);
    SoftLabels after = run_side(cs.after);
    return {std::move(before), std::move(after)};
}

}  // namespace cospace
