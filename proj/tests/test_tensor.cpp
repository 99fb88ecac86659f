#include <gtest/gtest.h>

#include <stdexcept>

#include "ffcnn/tensor.hpp"

using ffcnn::Tensor;

TEST(TensorTest, ShapeAndSize) {
    Tensor t({2, 3, 4});
    EXPECT_EQ(t.rank(), 3);
    EXPECT_EQ(t.size(), 24);
    EXPECT_EQ(t.dim(0), 2);
    EXPECT_EQ(t.dim(2), 4);
    for (int64_t i = 0; i < t.size(); ++i) EXPECT_EQ(t[i], 0.0f);
}

TEST(TensorTest, DataLengthMustMatchShape) {
    EXPECT_THROW(Tensor({2, 2}, {1.0f, 2.0f, 3.0f}), std::invalid_argument);
    EXPECT_NO_THROW(Tensor({2, 2}, {1.0f, 2.0f, 3.0f, 4.0f}));
}

TEST(TensorTest, RankLimits) {
    EXPECT_THROW(Tensor(std::vector<int>{}), std::invalid_argument);
    EXPECT_THROW(Tensor({1, 1, 1, 1, 1}), std::invalid_argument);
    EXPECT_THROW(Tensor({2, 0}), std::invalid_argument);
}

TEST(TensorTest, MultiIndexAccessRowMajor) {
    Tensor t({2, 3});
    t.at(1, 2) = 7.0f;
    EXPECT_EQ(t[5], 7.0f);
    Tensor u({2, 2, 2, 2});
    u.at(1, 0, 1, 0) = 3.0f;
    EXPECT_EQ(u[10], 3.0f);
}

TEST(TensorTest, FiniteCheck) {
    Tensor t({3});
    EXPECT_TRUE(t.all_finite());
    t[1] = std::numeric_limits<float>::infinity();
    EXPECT_FALSE(t.all_finite());
    t[1] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_FALSE(t.all_finite());
}

TEST(TensorTest, ShapeString) {
    Tensor t({2, 3, 4});
    EXPECT_EQ(t.shape_str(), "[2,3,4]");
}
