from rest_framework import serializers
import logging
import math

from .coding import Codebook, codewords_for_rate
from .ensembles import ensemble_from_document
from .models import Decoder, Metric, Preset, RunMode


class ReportFloatField(serializers.Field):
    """Float that may be inf or nan; rendered with repr so reruns compare bit for bit."""

    default_error_messages = {'invalid': 'A number (or inf/nan) is required.'}

    def to_internal_value(self, data):
        try:
            return float(data)
        except (TypeError, ValueError):
            self.fail('invalid')

    def to_representation(self, value):
        return repr(float(value))


class ExperimentConfigSerializer(serializers.Serializer):
    experiment = serializers.CharField(default='', allow_blank=True)
    ensemble = serializers.CharField(default=Preset.TWO_PURE_THETA)
    params = serializers.ListField(child=serializers.FloatField(), default=list)
    theta = serializers.FloatField(required=False, allow_null=True, default=None)
    n_list = serializers.ListField(child=serializers.IntegerField(min_value=1), default=list)
    delta = serializers.FloatField(default=0.25)
    N = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    rate = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)
    mode = serializers.ChoiceField(choices=RunMode.choices, default=RunMode.EXACT)
    samples = serializers.IntegerField(min_value=1, default=1000)
    codes = serializers.IntegerField(min_value=1, default=200)
    seed = serializers.IntegerField(min_value=0, default=0)
    compare_pgm = serializers.BooleanField(default=False)
    bruteforce = serializers.BooleanField(default=False)
    zmax = serializers.IntegerField(min_value=0, default=4)
    epsilon = serializers.FloatField(required=False, allow_null=True, default=None)
    per_code = serializers.BooleanField(default=False)
    sent = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    code_file = serializers.CharField(required=False, allow_null=True, default=None)
    decoder = serializers.ChoiceField(choices=Decoder.choices, default=Decoder.SEQUENTIAL)
    out = serializers.CharField(required=False, allow_null=True, default=None)
    report = serializers.CharField(required=False, allow_null=True, default=None)
    tol_psd = serializers.FloatField(required=False, allow_null=True, default=None)

    def validate_delta(self, value):
        if not value > 0:
            raise serializers.ValidationError("delta must be > 0.")
        return value

    def validate_epsilon(self, value):
        if value is not None and not 0 < value < 1:
            raise serializers.ValidationError("epsilon must lie in (0, 1).")
        return value

    def validate(self, data):
        if self.context.get('needs_block_length', True) and not data['n_list']:
            raise serializers.ValidationError("At least one block length is required (--n or --n-list).")
        if data.get('N') is not None and data.get('rate') is not None:
            raise serializers.ValidationError("Give either N or rate, not both.")
        if self.context.get('needs_code_size') and data.get('N') is None and data.get('rate') is None:
            raise serializers.ValidationError("One of N or rate is required.")
        if data.get('theta') is not None:
            if data['ensemble'] not in (Preset.TWO_PURE_THETA, Preset.DEPOLARIZED_PAIR):
                raise serializers.ValidationError(f"--theta does not apply to the '{data['ensemble']}' ensemble.")
            data['params'] = [data['theta']] + list(data['params'][1:])
        return data

    @staticmethod
    def code_size(data, n):
        """N for block length n: the given N, or round(2^{nR})."""
        if data.get('N') is not None:
            return data['N']
        return codewords_for_rate(data['rate'], n)


class EnsembleDocumentSerializer(serializers.Serializer):
    version = serializers.ChoiceField(choices=[1])
    dim = serializers.IntegerField(min_value=1)
    probs = serializers.ListField(child=serializers.FloatField(min_value=0.0), min_length=1)
    states = serializers.ListField(
        child=serializers.ListField(
            child=serializers.ListField(
                child=serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2),
            ),
        ),
        min_length=1,
    )

    def validate(self, data):
        dim = data['dim']
        if len(data['probs']) != len(data['states']):
            raise serializers.ValidationError(f"Got {len(data['probs'])} probabilities for {len(data['states'])} states.")
        for position, matrix in enumerate(data['states']):
            if len(matrix) != dim or any(len(row) != dim for row in matrix):
                raise serializers.ValidationError(f"State {position} is not a {dim}x{dim} matrix.")
        if not math.isclose(sum(data['probs']), 1.0, abs_tol=1e-10):
            raise serializers.ValidationError("Probabilities must sum to 1.")
        return data

    def create(self, validated_data):
        logging.debug(f"Loading ensemble document with {len(validated_data['probs'])} states")
        return ensemble_from_document(validated_data)


class CodebookSerializer(serializers.Serializer):
    entries = serializers.ListField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=1),
        min_length=1,
    )

    def validate_entries(self, value):
        if len({len(codeword) for codeword in value}) != 1:
            raise serializers.ValidationError("All codewords must have the same length.")
        return value

    def create(self, validated_data):
        return Codebook.from_list(validated_data['entries'])


class ResultRowSerializer(serializers.Serializer):
    experiment = serializers.CharField(allow_blank=True, default='')
    n = serializers.IntegerField(allow_null=True, default=None)
    delta = serializers.FloatField(allow_null=True, default=None)
    N = serializers.IntegerField(allow_null=True, default=None)
    R = ReportFloatField(allow_null=True, default=None)
    chi = ReportFloatField(allow_null=True, default=None)
    metric = serializers.ChoiceField(choices=Metric.choices)
    index = serializers.CharField(allow_blank=True, default='')
    value = ReportFloatField()
    stderr = ReportFloatField(allow_null=True, default=None)
    wall_time = serializers.FloatField(min_value=0.0, default=0.0)


RESULT_COLUMNS = list(ResultRowSerializer().fields)
