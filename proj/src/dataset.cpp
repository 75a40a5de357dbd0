#include "cospace/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cospace {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

int parse_int(const std::string& token, const std::string& context) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw DataError(context + ": bad integer '" + token + "'");
    }
    return value;
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

double parse_double(const std::string& token, const std::string& context) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw DataError(context + ": bad number '" + token + "'");
    }
    if (!std::isfinite(value)) {
        throw DataError(context + ": non-finite value '" + token + "'");
    }
    return value;
}

Partition::Partition(int num_classes, std::map<SampleId, LabelEntry> labeled,
                     std::set<SampleId> unlabeled)
    : num_classes_(num_classes), labeled_(std::move(labeled)), unlabeled_(std::move(unlabeled)) {
    if (num_classes_ <= 0) throw DataError("partition: num_classes must be positive");
    for (const auto& [id, entry] : labeled_) {
        if (entry.class_index < 0 || entry.class_index >= num_classes_) {
            throw DataError("partition: class index " + std::to_string(entry.class_index) +
                            " out of range for '" + id + "' (m=" + std::to_string(num_classes_) + ")");
        }
        if (unlabeled_.count(id) != 0) {
            throw DataError("partition: id '" + id + "' is both labeled and unlabeled");
        }
    }
}

int Partition::class_of(const SampleId& id) const {
    auto it = labeled_.find(id);
    if (it == labeled_.end()) throw DataError("partition: '" + id + "' is not labeled");
    return it->second.class_index;
}

Eigen::VectorXd Partition::label_vector(const SampleId& id) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(num_classes_);
    v(class_of(id)) = 1.0;
    return v;
}

Partition Partition::augmented(const std::vector<PseudoLabel>& selections) const {
    std::map<SampleId, LabelEntry> labeled = labeled_;
    std::set<SampleId> unlabeled = unlabeled_;
    for (const PseudoLabel& sel : selections) {
        if (labeled.count(sel.id) != 0) {
            throw DataError("augment: '" + sel.id + "' is already labeled");
        }
        if (unlabeled.erase(sel.id) == 0) {
            throw DataError("augment: '" + sel.id + "' is not in the unlabeled pool");
        }
        if (sel.class_index < 0 || sel.class_index >= num_classes_) {
            throw DataError("augment: pseudo-label class out of range for '" + sel.id + "'");
        }
        labeled[sel.id] = LabelEntry{sel.class_index, PseudoLabelInfo{sel.iteration, sel.confidence}};
    }
    return Partition(num_classes_, std::move(labeled), std::move(unlabeled));
}

Partition make_partition(const FeatureSpace& universe, const std::map<SampleId, int>& labels,
                         int num_classes) {
    std::map<SampleId, LabelEntry> labeled;
    for (const auto& [id, cls] : labels) {
        if (!universe.contains(id)) {
            throw DataError("labels: unknown sample id '" + id + "'");
        }
        labeled[id] = LabelEntry{cls, std::nullopt};
    }
    std::set<SampleId> unlabeled;
    for (const SampleId& id : universe.ids()) {
        if (labeled.count(id) == 0) unlabeled.insert(id);
    }
    return Partition(num_classes, std::move(labeled), std::move(unlabeled));
}

FeatureSpace read_features(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(origin + ": empty file");
    }
    long n = 0, d = 0;
    {
        std::istringstream hs(line);
        std::string magic, version, ntok, dtok;
        hs >> magic >> version >> ntok >> dtok;
        bool ok = magic == "#cospace-features" && version == "v1" && ntok.rfind("n=", 0) == 0 &&
                  dtok.rfind("d=", 0) == 0 && hs.eof();
        if (ok) {
            try {
                n = parse_int(ntok.substr(2), origin);
                d = parse_int(dtok.substr(2), origin);
            } catch (const DataError&) {
                ok = false;
            }
        }
        if (!ok || n < 0 || d <= 0) {
            throw DataError(origin + ": malformed header '" + line + "'");
        }
    }
    std::vector<SampleId> ids;
    ids.reserve(n);
    Eigen::MatrixXd features(n, d);
    for (long row = 0; row < n; ++row) {
        if (!std::getline(in, line)) {
            throw DataError(origin + ": expected " + std::to_string(n) + " rows, got " +
                            std::to_string(row));
        }
        std::vector<std::string> fields = split_tabs(line);
        if (static_cast<long>(fields.size()) != d + 1) {
            throw DataError(origin + ": row " + std::to_string(row + 1) + " has " +
                            std::to_string(fields.size() - 1) + " values, expected " +
                            std::to_string(d));
        }
        if (fields[0].empty()) {
            throw DataError(origin + ": empty sample id at row " + std::to_string(row + 1));
        }
        ids.push_back(fields[0]);
        for (long col = 0; col < d; ++col) {
            features(row, col) =
                parse_double(fields[col + 1], origin + ": row " + std::to_string(row + 1));
        }
    }
    while (std::getline(in, line)) {
        if (!line.empty()) {
            throw DataError(origin + ": trailing content after " + std::to_string(n) + " rows");
        }
    }
    try {
        return FeatureSpace(std::move(ids), std::move(features));
    } catch (const DataError& e) {
        throw DataError(origin + ": " + e.what());
    }
}

FeatureSpace load_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open feature file '" + path + "'");
    return read_features(in, path);
}

void write_features(const FeatureSpace& space, std::ostream& out) {
    out << "#cospace-features v1 n=" << space.size() << " d=" << space.dim() << "\n";
    for (Eigen::Index i = 0; i < space.size(); ++i) {
        out << space.ids()[i];
        for (Eigen::Index j = 0; j < space.dim(); ++j) {
            out << '\t' << format_double(space.matrix()(i, j));
        }
        out << '\n';
    }
}

void save_features(const FeatureSpace& space, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write feature file '" + path + "'");
    write_features(space, out);
    if (!out) throw DataError("write failed for '" + path + "'");
}

std::map<SampleId, int> read_labels(std::istream& in, int num_classes, const std::string& origin) {
    if (num_classes <= 0) throw ConfigError("num_classes must be positive");
    std::map<SampleId, int> labels;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != 2 || fields[0].empty()) {
            throw DataError(origin + ": line " + std::to_string(lineno) +
                            ": expected 'id<TAB>class'");
        }
        int cls = parse_int(fields[1], origin + ": line " + std::to_string(lineno));
        if (cls < 0 || cls >= num_classes) {
            throw DataError(origin + ": line " + std::to_string(lineno) + ": class " +
                            std::to_string(cls) + " out of range [0," +
                            std::to_string(num_classes) + ")");
        }
        if (!labels.emplace(fields[0], cls).second) {
            throw DataError(origin + ": duplicate sample id '" + fields[0] + "'");
        }
    }
    return labels;
}

std::map<SampleId, int> load_labels(const std::string& path, int num_classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open label file '" + path + "'");
    return read_labels(in, num_classes, path);
}

void write_pseudo_labels(const std::vector<PseudoLabel>& rows, std::ostream& out) {
    for (const PseudoLabel& row : rows) {
        out << row.id << '\t' << row.class_index << '\t' << format_double(row.confidence) << '\t'
            << row.iteration << '\n';
    }
}

void save_pseudo_labels(const std::vector<PseudoLabel>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_pseudo_labels(rows, out);
    if (!out) throw DataError("write failed for '" + path + "'");
}

std::vector<PseudoLabel> load_pseudo_labels(const std::string& path, int num_classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open pseudo-label file '" + path + "'");
    std::vector<PseudoLabel> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields = split_tabs(line);
        const std::string where = path + ": line " + std::to_string(lineno);
        if (fields.size() != 4 || fields[0].empty()) {
            throw DataError(where + ": expected 'id<TAB>class<TAB>confidence<TAB>iteration'");
        }
        PseudoLabel row;
        row.id = fields[0];
        row.class_index = parse_int(fields[1], where);
        if (row.class_index < 0 || row.class_index >= num_classes) {
            throw DataError(where + ": class out of range");
        }
        row.confidence = parse_double(fields[2], where);
        row.iteration = parse_int(fields[3], where);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cospace
