"""RC4/WEP primitives and key recovery."""

from .rc4 import BadSeedLength, rc4_keystream, xor_bytes
from .wep import IcvMismatch, WepFrame, WepKey, icv, keystream, recover_keystream, wep_decrypt, wep_encrypt
from .ptw import DEFAULT_BUDGET, InsufficientSamples, KeyVoteTable, NotFoundWithinBudget, ptw_crack, verify_key
from .session import NoArpTemplateMatch, arp_samples, crack_session, decrypt_capture, decrypt_record
