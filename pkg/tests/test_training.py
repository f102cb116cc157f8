"""Tests for network assembly, loss, training and evaluation."""

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lane.config.schema import TrainerConfig
from lane.engine import (
    BackpropagationTrainer,
    EvaluationError,
    FeedForwardNetwork,
    NetworkError,
    TrainingError,
    build_network,
    cross_entropy,
    evaluate,
    train,
)
from lane.io import DataSet, load_dataset, split, synthesize
from lane.nn import FullyConnectedLayer, SoftmaxOutputLayer
from lane.runtime import ParallelHost, SerialHost
from lane.tensor import DenseVector, SeededRng, ShapeError


def one_hot(index: int, width: int) -> DenseVector:
    label = DenseVector(width)
    label.data[index] = 1.0
    return label


def xor_dataset(low: float = 0.0) -> DataSet:
    """The four XOR points with inputs `low` (false) and 1 (true)."""
    data = DataSet(2, 2)
    for a, b in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        x = [1.0 if bit else low for bit in (a, b)]
        data.add(DenseVector.from_values(x), one_hot(a ^ b, 2))
    return data


class TestBuildNetwork:
    """Tests for build_network and FeedForwardNetwork."""

    def test_one_hidden_layer(self) -> None:
        """(4, [8], 3) chains a 4->8 tanh layer into an 8->3 softmax layer."""
        net = build_network(4, [8], 3, SeededRng(1))

        assert [type(layer) for layer in net.layers] == [FullyConnectedLayer, SoftmaxOutputLayer]
        assert net.hidden[0].weights.shape == (4, 8)
        assert net.output.weights.shape == (8, 3)
        assert net.class_count == 3
        assert net.parameter_count == 4 * 8 + 8 + 8 * 3 + 3

    def test_softmax_only(self) -> None:
        """(2, [], 2) is a softmax-only network."""
        net = build_network(2, [], 2, SeededRng(1))

        assert net.hidden == []
        assert net.output.weights.shape == (2, 2)

    def test_biases_zero(self) -> None:
        """Fresh networks start with zero biases."""
        net = build_network(3, [5, 4], 2, SeededRng(2))
        assert all(not layer.biases.data.any() for layer in net.layers)

    @pytest.mark.parametrize(
        "input_width,hidden,classes",
        [(0, [4], 3), (4, [4], 1), (4, [0], 3), (4, [3, -1], 3)],
    )
    def test_invalid_sizes(self, input_width: int, hidden: list[int], classes: int) -> None:
        """Invalid sizes are a construction error."""
        with pytest.raises(NetworkError):
            build_network(input_width, hidden, classes, SeededRng(0))

    def test_layers_must_chain(self) -> None:
        """A layer whose fan-in differs from the previous width is rejected."""
        with pytest.raises(NetworkError):
            FeedForwardNetwork(
                input_width=4,
                hidden=[FullyConnectedLayer(4, 6)],
                output=SoftmaxOutputLayer(5, 3),
            )

    def test_same_seed_same_state(self) -> None:
        """Equal seeds give equal weight digests."""
        a = build_network(4, [8], 3, SeededRng(42))
        b = build_network(4, [8], 3, SeededRng(42))
        c = build_network(4, [8], 3, SeededRng(43))

        assert a.state_digest() == b.state_digest()
        assert a.state_digest() != c.state_digest()

    def test_predict_is_argmax(self) -> None:
        """predict returns the index of the largest output."""
        net = build_network(2, [], 3, SeededRng(0))
        net.output.biases.data[:] = [0.0, 5.0, 1.0]

        assert net.predict(DenseVector.from_values([0.1, 0.2])) == 1

    @pytest.mark.slow
    def test_benchmark_topology(self) -> None:
        """(340, [100000], 10) builds the benchmark network."""
        net = build_network(340, [100_000], 10, SeededRng(42))

        assert net.hidden[0].weights.shape == (340, 100_000)
        assert net.output.weights.shape == (100_000, 10)


class TestCrossEntropy:
    """Tests for cross_entropy."""

    def test_perfect_prediction(self) -> None:
        """predicted == target gives (almost) zero."""
        assert cross_entropy(one_hot(1, 3), one_hot(1, 3)) <= 1e-9

    def test_uniform_prediction(self) -> None:
        """Uniform over 3 classes gives ln 3."""
        predicted = DenseVector(3, fill=1 / 3)
        assert cross_entropy(predicted, one_hot(2, 3)) == pytest.approx(math.log(3), abs=1e-6)

    def test_zero_probability_is_clamped(self) -> None:
        """A zero at the target class gives -ln(1e-12)."""
        value = cross_entropy(one_hot(0, 2), one_hot(1, 2))

        assert math.isfinite(value)
        assert value == pytest.approx(27.631021, abs=1e-5)

    def test_shape_mismatch(self) -> None:
        """Different lengths are a shape error."""
        with pytest.raises(ShapeError):
            cross_entropy(DenseVector(2), DenseVector(3))


class TestTrain:
    """Tests for the backpropagation trainer."""

    def test_single_epoch(self) -> None:
        """max_epochs=1 gives exactly one EpochStats entry."""
        net = build_network(2, [3], 2, SeededRng(0))
        history = train(net, xor_dataset(), TrainerConfig(max_epochs=1))

        assert len(history) == 1
        assert history[0].epoch == 1
        assert history[0].mean_loss >= 0.0
        assert 0.0 <= history[0].accuracy <= 1.0

    def test_stops_at_max_error(self) -> None:
        """A loose threshold stops after the first epoch."""
        net = build_network(2, [3], 2, SeededRng(0))
        history = train(net, xor_dataset(), TrainerConfig(max_error=10.0, max_epochs=50))

        assert len(history) == 1

    def test_serial_parallel_identical(self) -> None:
        """Fixed seed and data give bitwise-equal losses and weights on both devices."""
        data = synthesize(40, 5, 3, SeededRng(7))
        config = TrainerConfig(eta=0.1, max_epochs=5, seed=7)

        serial_net = build_network(5, [9], 3, SeededRng(7))
        parallel_net = build_network(5, [9], 3, SeededRng(7))
        serial_history = train(serial_net, data, config, SerialHost())
        with ParallelHost(4) as device:
            parallel_history = train(parallel_net, data, config, device)

        assert [s.mean_loss for s in serial_history] == [s.mean_loss for s in parallel_history]
        assert serial_net.state_digest() == parallel_net.state_digest()

    def test_deterministic_reruns(self) -> None:
        """Identical seed, data and config give identical histories."""
        data = synthesize(30, 3, 2, SeededRng(1))
        config = TrainerConfig(max_epochs=4, seed=3)

        first = train(build_network(3, [4], 2, SeededRng(3)), data, config)
        second = train(build_network(3, [4], 2, SeededRng(3)), data, config)

        assert first == second

    def test_xor(self) -> None:
        """XOR in +-1 encoding, hidden [4], eta 0.5: some seed below 10 fits all four points."""
        data = xor_dataset(low=-1.0)

        for seed in range(10):
            net = build_network(2, [4], 2, SeededRng(seed))
            train(net, data, TrainerConfig(eta=0.5, max_epochs=5000, max_error=0.05, seed=seed))
            if evaluate(net, data).accuracy == 1.0:
                break
        else:
            pytest.fail("no seed in 0..9 separated XOR")

    def test_repeated_sample_descends(self) -> None:
        """Loss on one repeated sample does not increase after the first epoch."""
        data = DataSet(3, 3)
        data.add(DenseVector.from_values([0.2, 0.9, 0.4]), one_hot(2, 3))
        net = build_network(3, [5], 3, SeededRng(4))
        history = train(net, data, TrainerConfig(eta=1e-2, max_epochs=30))
        losses = [s.mean_loss for s in history]

        assert all(later <= earlier for earlier, later in zip(losses[1:], losses[2:]))

    def test_dataset_not_mutated(self) -> None:
        """Training leaves the input samples untouched."""
        data = synthesize(12, 4, 3, SeededRng(2))
        before = [(item.features.data.copy(), item.label.data.copy()) for item in data]
        train(build_network(4, [4], 3, SeededRng(2)), data, TrainerConfig(max_epochs=3))

        for (features, label), item in zip(before, data):
            np.testing.assert_array_equal(item.features.data, features)
            np.testing.assert_array_equal(item.label.data, label)

    def test_device_released_after_training(self) -> None:
        """The trainer evicts its schedules' buffers when done."""
        with ParallelHost(2) as device:
            trainer = BackpropagationTrainer(TrainerConfig(max_epochs=2), device)
            trainer.train(build_network(2, [3], 2, SeededRng(0)), xor_dataset())

            assert device.resident_bytes == 0

    def test_empty_set(self) -> None:
        """An empty training set is a training error."""
        with pytest.raises(TrainingError):
            train(build_network(2, [3], 2, SeededRng(0)), DataSet(2, 2))

    def test_width_mismatch(self) -> None:
        """Samples must match the network's input width and class count."""
        with pytest.raises(TrainingError):
            train(build_network(3, [3], 2, SeededRng(0)), xor_dataset())


class TestEvaluate:
    """Tests for evaluate."""

    def test_always_right(self) -> None:
        """A network that always outputs the target class scores 1.0."""
        net = build_network(2, [], 2, SeededRng(0))
        net.output.weights.data[:] = 0.0
        net.output.biases.data[:] = [10.0, 0.0]
        data = DataSet(2, 2)
        for x in ([0.1, 0.2], [0.9, 0.3], [0.5, 0.5]):
            data.add(DenseVector.from_values(x), one_hot(0, 2))

        stats = evaluate(net, data)
        assert stats.accuracy == 1.0
        assert stats.epoch == 0

    def test_untrained_is_chance_level(self) -> None:
        """An untrained network on balanced 3-class random data scores near 1/3."""
        data = synthesize(600, 4, 3, SeededRng(5))
        stats = evaluate(build_network(4, [8], 3, SeededRng(5)), data)

        assert abs(stats.accuracy - 1 / 3) < 0.1

    @settings(max_examples=25, deadline=None)
    @given(scale=st.floats(min_value=0.01, max_value=100.0))
    def test_accuracy_ignores_positive_rescaling(self, scale: float) -> None:
        """Scaling every output by the same positive factor leaves accuracy unchanged."""
        data = synthesize(60, 4, 3, SeededRng(11))
        net = build_network(4, [8], 3, SeededRng(11))
        baseline = evaluate(net, data).accuracy

        forward = net.forward

        def scaled_forward(x: DenseVector) -> DenseVector:
            outputs = forward(x)
            outputs.data *= np.float32(scale)
            return outputs

        net.forward = scaled_forward  # type: ignore[method-assign]
        assert evaluate(net, data).accuracy == baseline

    def test_empty_set(self) -> None:
        """Evaluating an empty set is an evaluation error."""
        with pytest.raises(EvaluationError):
            evaluate(build_network(2, [], 2, SeededRng(0)), DataSet(2, 2))

    def test_iris(self, iris_file: Path) -> None:
        """Iris 135/15 split, hidden [8], eta 0.1, seed 42 reaches test accuracy >= 0.9."""
        data = load_dataset(iris_file, 4, 3)
        train_set, test_set = split(data, 0.9, seed=42)
        net = build_network(4, [8], 3, SeededRng(42))

        train(net, train_set, TrainerConfig(eta=0.1, max_epochs=2000, max_error=0.1, seed=42))
        stats = evaluate(net, test_set)

        assert (len(train_set), len(test_set)) == (135, 15)
        assert stats.accuracy >= 0.9

