# -*- coding: utf-8 -*-
from src.fields.encoding import EncodingConfig, positional_encode
from src.fields.glass_network import GlassFieldOutput, GlassNetwork, glass_field
from src.fields.nerf_network import NerfNetwork, RadianceFieldOutput, nerf_field
from src.fields.decoder_gate import DecoderGate, decode_and_gate
from src.fields.model import GlassNerfModel, NetworkConfig
