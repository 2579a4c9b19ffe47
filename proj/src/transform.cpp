#include "hyperlin/transform.hpp"

#include "hyperlin/error.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hyperlin::transform {

namespace fs = std::filesystem;

namespace {

void write_indices(std::ostream& os, const IndexSet& idx) {
  os << ' ' << idx.size();
  for (int i : idx) os << ' ' << i;
}

IndexSet read_indices(std::istream& is) {
  std::size_t k = 0;
  is >> k;
  IndexSet idx(k);
  for (auto& i : idx) is >> i;
  return idx;
}

void write_matrix(std::ostream& os, const Mat& m) {
  os << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) os << (c ? " " : "") << m(r, c);
    os << '\n';
  }
}

Mat read_matrix(std::istream& is) {
  int r = 0, c = 0;
  is >> r >> c;
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) is >> m(i, j);
  if (!is) throw Error(ErrorCode::ConfigError, "malformed matrix file");
  return m;
}

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Vec newton_inverse(const Transform& t, const Vec& y, const Vec& seed, const NewtonSettings& s) {
  Vec x = seed;
  Vec r = t.forward(x) - y;
  double rn = max_abs(r);
  const double goal = s.tol * std::max(1.0, max_abs(y));
  for (int it = 0; it < s.max_iter && rn > goal; ++it) {
    const Vec dx = t.derivative(x).fullPivLu().solve(r);
    double step = 1.0;
    bool improved = false;
    for (int h = 0; h < 30; ++h) {
      const Vec xn = x - step * dx;
      const Vec rnew = t.forward(xn) - y;
      const double nn = max_abs(rnew);
      if (nn < rn) {
        x = xn;
        r = rnew;
        rn = nn;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  // Round-off stalls are accepted a little above the goal.
  if (!(rn <= 1e3 * goal)) {
    std::ostringstream os;
    os << "inverse of " << t.label() << " did not converge (residual " << rn << ")";
    throw Error(ErrorCode::NewtonFailed, os.str());
  }
  return x;
}

Vec Transform::inverse(const Vec& y) const { return newton_inverse(*this, y, y); }

LinearTransform::LinearTransform(Mat m, Mat m_inv, std::string label)
    : Transform(static_cast<int>(m.rows()), std::move(label)), m_(std::move(m)), m_inv_(std::move(m_inv)) {}

void LinearTransform::save(const std::string& dir, const std::string& stem, std::ostream& manifest) const {
  std::ofstream os(fs::path(dir) / (stem + ".txt"));
  write_matrix(os, m_);
  write_matrix(os, m_inv_);
  manifest << "linear " << label() << ' ' << stem << ".txt\n";
}

ShearTransform::ShearTransform(int dim, IndexSet target, IndexSet source, GridFunction g, std::string label)
    : Transform(dim, std::move(label)), target_(std::move(target)), source_(std::move(source)), g_(std::move(g)) {
  if (g_.dim() != static_cast<int>(source_.size()) || g_.codim() != static_cast<int>(target_.size()))
    throw Error(ErrorCode::InvalidArgument, "shear graph shape does not match its index sets");
}

Vec ShearTransform::forward(const Vec& x) const {
  Vec y = x;
  scatter(y, target_, gather(x, target_) - g_.eval_cubic(gather(x, source_)));
  return y;
}

Vec ShearTransform::inverse(const Vec& y) const {
  Vec x = y;
  scatter(x, target_, gather(y, target_) + g_.eval_cubic(gather(y, source_)));
  return x;
}

Mat ShearTransform::derivative(const Vec& x) const {
  Mat d = Mat::Identity(dim(), dim());
  const Mat dg = g_.derivative_cubic(gather(x, source_));
  for (std::size_t r = 0; r < target_.size(); ++r)
    for (std::size_t c = 0; c < source_.size(); ++c) d(target_[r], source_[c]) -= dg(r, c);
  return d;
}

void ShearTransform::save(const std::string& dir, const std::string& stem, std::ostream& manifest) const {
  g_.save((fs::path(dir) / (stem + ".csv")).string());
  manifest << "shear " << label() << " target";
  write_indices(manifest, target_);
  manifest << " source";
  write_indices(manifest, source_);
  manifest << ' ' << stem << ".csv\n";
}

ReplaceTransform::ReplaceTransform(int dim, std::vector<Block> blocks, std::string label, NewtonSettings newton)
    : Transform(dim, std::move(label)), blocks_(std::move(blocks)), newton_(newton) {
  for (const auto& b : blocks_)
    if (b.g.dim() != dim || b.g.codim() != static_cast<int>(b.idx.size()))
      throw Error(ErrorCode::InvalidArgument, "replacement grid shape does not match its block");
}

Vec ReplaceTransform::forward(const Vec& x) const {
  Vec y = x;
  for (const auto& b : blocks_) scatter(y, b.idx, b.g.eval_cubic(x));
  return y;
}

Vec ReplaceTransform::inverse(const Vec& y) const { return newton_inverse(*this, y, y, newton_); }

Mat ReplaceTransform::derivative(const Vec& x) const {
  Mat d = Mat::Identity(dim(), dim());
  for (const auto& b : blocks_) {
    const Mat db = b.g.derivative_cubic(x);
    for (std::size_t r = 0; r < b.idx.size(); ++r) d.row(b.idx[r]) = db.row(static_cast<int>(r));
  }
  return d;
}

void ReplaceTransform::save(const std::string& dir, const std::string& stem, std::ostream& manifest) const {
  manifest << "replace " << label() << " blocks " << blocks_.size();
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string file = stem + "_b" + std::to_string(i) + ".csv";
    blocks_[i].g.save((fs::path(dir) / file).string());
    write_indices(manifest, blocks_[i].idx);
    manifest << ' ' << file;
  }
  manifest << '\n';
}

BlockTransform::BlockTransform(int dim, std::vector<Part> parts, std::string label)
    : Transform(dim, std::move(label)), parts_(std::move(parts)) {
  for (const auto& p : parts_)
    if (p.t->dim() != static_cast<int>(p.idx.size()))
      throw Error(ErrorCode::InvalidArgument, "block part dimension does not match its index set");
}

Vec BlockTransform::forward(const Vec& x) const {
  Vec y = x;
  for (const auto& p : parts_) scatter(y, p.idx, p.t->forward(gather(x, p.idx)));
  return y;
}

Vec BlockTransform::inverse(const Vec& y) const {
  Vec x = y;
  for (const auto& p : parts_) scatter(x, p.idx, p.t->inverse(gather(y, p.idx)));
  return x;
}

Mat BlockTransform::derivative(const Vec& x) const {
  Mat d = Mat::Identity(dim(), dim());
  for (const auto& p : parts_) {
    const Mat dp = p.t->derivative(gather(x, p.idx));
    for (std::size_t r = 0; r < p.idx.size(); ++r)
      for (std::size_t c = 0; c < p.idx.size(); ++c) d(p.idx[r], p.idx[c]) = dp(r, c);
  }
  return d;
}

void BlockTransform::save(const std::string& dir, const std::string& stem, std::ostream& manifest) const {
  manifest << "block " << label() << " parts " << parts_.size();
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const std::string sub = stem + "_p" + std::to_string(i);
    Chain(parts_[i].t->dim(), {parts_[i].t}, parts_[i].t->label()).save_dir((fs::path(dir) / sub).string());
    write_indices(manifest, parts_[i].idx);
    manifest << ' ' << sub;
  }
  manifest << '\n';
}

Chain::Chain(int dim, std::vector<TransformPtr> members, std::string label)
    : Transform(dim, std::move(label)), members_(std::move(members)) {
  for (const auto& m : members_)
    if (m->dim() != dim) throw Error(ErrorCode::InvalidArgument, "chain member dimension mismatch");
}

Vec Chain::forward(const Vec& x) const {
  Vec y = x;
  for (const auto& m : members_) y = m->forward(y);
  return y;
}

Vec Chain::inverse(const Vec& y) const {
  Vec x = y;
  for (auto it = members_.rbegin(); it != members_.rend(); ++it) x = (*it)->inverse(x);
  return x;
}

Mat Chain::derivative(const Vec& x) const {
  Mat d = Mat::Identity(dim(), dim());
  Vec y = x;
  for (const auto& m : members_) {
    d = m->derivative(y) * d;
    y = m->forward(y);
  }
  return d;
}

void Chain::save(const std::string& dir, const std::string& stem, std::ostream& manifest) const {
  save_dir((fs::path(dir) / stem).string());
  manifest << "chain " << label() << ' ' << stem << '\n';
}

void Chain::save_dir(const std::string& dir) const {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  manifest << "dim " << dim() << " label " << label() << " members " << members_.size() << '\n';
  for (std::size_t i = 0; i < members_.size(); ++i) {
    std::ostringstream stem;
    stem << std::setw(2) << std::setfill('0') << i << '_' << members_[i]->kind();
    members_[i]->save(dir, stem.str(), manifest);
  }
  if (!manifest) throw Error(ErrorCode::InvalidArgument, "cannot write chain manifest in " + dir);
}

std::shared_ptr<const Chain> Chain::load_dir(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.txt");
  if (!in) throw Error(ErrorCode::ConfigError, "missing chain manifest in " + dir);
  std::string tag, label, mtag;
  int dim = 0;
  std::size_t count = 0;
  in >> tag >> dim >> mtag >> label >> mtag >> count;
  if (tag != "dim" || !in) throw Error(ErrorCode::ConfigError, "malformed chain manifest in " + dir);
  std::vector<TransformPtr> members;
  for (std::size_t i = 0; i < count; ++i) {
    std::string kind, mlabel;
    in >> kind >> mlabel;
    if (kind == "linear") {
      std::string file;
      in >> file;
      std::ifstream ms(fs::path(dir) / file);
      Mat m = read_matrix(ms);
      Mat mi = read_matrix(ms);
      members.push_back(std::make_shared<LinearTransform>(m, mi, mlabel));
    } else if (kind == "shear") {
      std::string t1, t2, file;
      in >> t1;
      IndexSet target = read_indices(in);
      in >> t2;
      IndexSet source = read_indices(in);
      in >> file;
      members.push_back(std::make_shared<ShearTransform>(dim, target, source,
                                                         GridFunction::load((fs::path(dir) / file).string()), mlabel));
    } else if (kind == "replace") {
      std::string t;
      std::size_t nb = 0;
      in >> t >> nb;
      std::vector<ReplaceTransform::Block> blocks;
      for (std::size_t b = 0; b < nb; ++b) {
        IndexSet idx = read_indices(in);
        std::string file;
        in >> file;
        blocks.push_back({idx, GridFunction::load((fs::path(dir) / file).string())});
      }
      members.push_back(std::make_shared<ReplaceTransform>(dim, blocks, mlabel));
    } else if (kind == "block") {
      std::string t;
      std::size_t np = 0;
      in >> t >> np;
      std::vector<BlockTransform::Part> parts;
      for (std::size_t p = 0; p < np; ++p) {
        IndexSet idx = read_indices(in);
        std::string sub;
        in >> sub;
        parts.push_back({idx, load_dir((fs::path(dir) / sub).string())});
      }
      members.push_back(std::make_shared<BlockTransform>(dim, parts, mlabel));
    } else if (kind == "chain") {
      std::string sub;
      in >> sub;
      members.push_back(load_dir((fs::path(dir) / sub).string()));
    } else {
      throw Error(ErrorCode::ConfigError, "unknown transform kind '" + kind + "' in " + dir);
    }
    if (!in) throw Error(ErrorCode::ConfigError, "malformed manifest line " + std::to_string(i + 2) + " in " + dir);
  }
  return std::make_shared<Chain>(dim, members, label);
}

std::shared_ptr<const Chain> identity_chain(int dim) { return std::make_shared<Chain>(dim, std::vector<TransformPtr>{}, "identity"); }

AnalyticTransform::AnalyticTransform(int dim, Fn forward, Fn inverse, Jac derivative, std::string label)
    : Transform(dim, std::move(label)), f_(std::move(forward)), inv_(std::move(inverse)), df_(std::move(derivative)) {}

Vec AnalyticTransform::inverse(const Vec& y) const { return inv_ ? inv_(y) : newton_inverse(*this, y, y); }

Mat AnalyticTransform::derivative(const Vec& x) const {
  if (df_) return df_(x);
  return dynamics::finite_difference_jacobian(f_, x, 1e-6 * std::max(1.0, max_abs(x)));
}

void AnalyticTransform::save(const std::string&, const std::string&, std::ostream&) const {
  throw Error(ErrorCode::InvalidArgument, "analytic transform '" + label() + "' cannot be exported");
}

ConjugatedMap::ConjugatedMap(dynamics::MapPtr inner, TransformPtr t, Mat linear)
    : Map(std::move(linear), dynamics::unbounded_box(inner->dim())), inner_(std::move(inner)), t_(std::move(t)) {}

Vec ConjugatedMap::eval(const Vec& x) const { return t_->forward(inner_->eval(t_->inverse(x))); }

Mat ConjugatedMap::jacobian(const Vec& x) const {
  const Vec z = t_->inverse(x);
  const Vec fz = inner_->eval(z);
  return t_->derivative(fz) * inner_->jacobian(z) * t_->derivative(z).inverse();
}

}  // namespace hyperlin::transform
