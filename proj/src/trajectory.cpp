#include "rdirl/trajectory.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "rdirl/env.hpp"

namespace rdirl {

namespace {

// All scalars are little-endian on disk regardless of host order.
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

class Reader {
 public:
  Reader(std::string data, std::string what) : data_(std::move(data)), what_(std::move(what)) {}

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint8_t>(data_[pos_]) |
                      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(data_[pos_ + 1])) << 8);
    pos_ += 2;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

  void expect_magic(const char* magic) {
    const std::string m = bytes(4);
    if (m != magic) throw std::runtime_error(what_ + ": corrupt header (bad magic)");
  }

  void expect_version(std::uint16_t want) {
    const std::uint16_t got = u16();
    if (got != want)
      throw std::runtime_error(what_ + ": version mismatch (file v" + std::to_string(got) +
                               ", supported v" + std::to_string(want) + ")");
  }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) throw std::runtime_error(what_ + ": corrupt header (truncated)");
  }
  std::string data_;
  std::string what_;
  std::size_t pos_ = 0;
};

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return data;
}

}  // namespace

double Trajectory::total_reward() const {
  double r = 0.0;
  for (const auto& rec : records) r += rec.r_true;
  return r;
}

Trajectory Trajectory::strip_controls() const {
  Trajectory t = *this;
  t.has_controls = false;
  for (auto& rec : t.records) rec.u.resize(0);
  return t;
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
  if (traj.env_name.size() > 0xffff)
    throw std::invalid_argument("save_trajectory: env name too long");
  std::string out;
  out += "RDTR";
  put_u16(out, 1);  // version
  put_u16(out, static_cast<std::uint16_t>(traj.env_name.size()));
  out += traj.env_name;
  put_u16(out, static_cast<std::uint16_t>(traj.state_dim));
  put_u16(out, static_cast<std::uint16_t>(traj.control_dim));
  out.push_back(traj.has_controls ? 1 : 0);
  out.push_back(traj.truncated ? 1 : 0);
  put_u16(out, 0);  // reserved
  put_u64(out, traj.seed);
  put_u64(out, traj.records.size());
  for (const auto& rec : traj.records) {
    if (rec.x.size() != traj.state_dim)
      throw std::invalid_argument("save_trajectory: record state dim mismatch");
    put_u64(out, rec.t);
    for (int i = 0; i < traj.state_dim; ++i) put_f64(out, rec.x[i]);
    if (traj.has_controls) {
      if (rec.u.size() != traj.control_dim)
        throw std::invalid_argument("save_trajectory: record control dim mismatch");
      for (int i = 0; i < traj.control_dim; ++i) put_f64(out, rec.u[i]);
    }
    put_f64(out, rec.r_true);
  }
  write_file(path, out);
}

Trajectory load_trajectory(const std::string& path) {
  Reader r(read_file(path), "trajectory " + path);
  r.expect_magic("RDTR");
  r.expect_version(1);
  Trajectory t;
  const std::uint16_t name_len = r.u16();
  t.env_name = r.bytes(name_len);
  t.state_dim = r.u16();
  t.control_dim = r.u16();
  const std::string flags = r.bytes(2);
  t.has_controls = flags[0] != 0;
  t.truncated = flags[1] != 0;
  r.u16();  // reserved
  t.seed = r.u64();
  const std::uint64_t count = r.u64();
  const std::size_t record_size =
      8 + 8 * (static_cast<std::size_t>(t.state_dim) +
               (t.has_controls ? static_cast<std::size_t>(t.control_dim) : 0) + 1);
  if (r.remaining() != count * record_size)
    throw std::runtime_error("trajectory " + path +
                             ": payload length does not match declared record count");
  t.records.resize(count);
  std::uint64_t prev_t = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    TrajRecord& rec = t.records[i];
    rec.t = r.u64();
    if (i > 0 && rec.t <= prev_t)
      throw std::runtime_error("trajectory " + path + ": record indices not increasing");
    prev_t = rec.t;
    rec.x.resize(t.state_dim);
    for (int j = 0; j < t.state_dim; ++j) rec.x[j] = r.f64();
    if (t.has_controls) {
      rec.u.resize(t.control_dim);
      for (int j = 0; j < t.control_dim; ++j) rec.u[j] = r.f64();
    }
    rec.r_true = r.f64();
  }
  return t;
}

void validate_trajectory(const Trajectory& traj, const EnvModel& env) {
  if (traj.env_name != env.name)
    throw std::runtime_error("trajectory env '" + traj.env_name + "' does not match '" +
                             env.name + "'");
  if (traj.state_dim != env.state_dim || traj.control_dim != env.control_dim)
    throw std::runtime_error("trajectory dimensions do not match env preset " + env.name);
  if (traj.records.empty()) throw std::runtime_error("trajectory has no records");
}

void save_theta(const Eigen::VectorXd& theta, const std::string& path) {
  std::string out;
  out += "RDTH";
  put_u16(out, 1);
  put_u16(out, 0);  // reserved
  put_u64(out, static_cast<std::uint64_t>(theta.size()));
  for (int i = 0; i < theta.size(); ++i) put_f64(out, theta[i]);
  write_file(path, out);
}

Eigen::VectorXd load_theta(const std::string& path) {
  Reader r(read_file(path), "theta " + path);
  r.expect_magic("RDTH");
  r.expect_version(1);
  r.u16();  // reserved
  const std::uint64_t d = r.u64();
  if (r.remaining() != d * 8)
    throw std::runtime_error("theta " + path + ": payload length does not match header");
  Eigen::VectorXd theta(static_cast<int>(d));
  for (std::uint64_t i = 0; i < d; ++i) theta[static_cast<int>(i)] = r.f64();
  return theta;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  if (c.p.rows() != c.theta.size() || c.p.cols() != c.theta.size())
    throw std::invalid_argument("save_checkpoint: covariance shape mismatch");
  std::string out;
  out += "RDCK";
  put_u16(out, 1);
  put_u16(out, 0);  // reserved
  put_u64(out, static_cast<std::uint64_t>(c.theta.size()));
  put_u64(out, c.step_index);
  put_f64(out, c.q_scale);
  for (int i = 0; i < c.theta.size(); ++i) put_f64(out, c.theta[i]);
  for (int i = 0; i < c.p.rows(); ++i)  // row-major
    for (int j = 0; j < c.p.cols(); ++j) put_f64(out, c.p(i, j));
  write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(read_file(path), "checkpoint " + path);
  r.expect_magic("RDCK");
  r.expect_version(1);
  r.u16();  // reserved
  const std::uint64_t d = r.u64();
  Checkpoint c;
  c.step_index = r.u64();
  c.q_scale = r.f64();
  if (r.remaining() != (d + d * d) * 8)
    throw std::runtime_error("checkpoint " + path + ": payload length does not match header");
  c.theta.resize(static_cast<int>(d));
  for (std::uint64_t i = 0; i < d; ++i) c.theta[static_cast<int>(i)] = r.f64();
  c.p.resize(static_cast<int>(d), static_cast<int>(d));
  for (std::uint64_t i = 0; i < d; ++i)
    for (std::uint64_t j = 0; j < d; ++j)
      c.p(static_cast<int>(i), static_cast<int>(j)) = r.f64();
  return c;
}

}  // namespace rdirl
