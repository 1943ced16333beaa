"""Cryptographic primitives: hashing, threshold sharing, authenticated
encryption, recoverable signatures, verifiable randomness, layered wrapping."""
from .keccak import keccak256
from .keys import KeyPair, generate_keypair, pk_to_address, sk_to_pk
from .shamir import (DEFAULT_PRIME, TEST_PRIME, Share, share_from_bytes,
                     share_to_bytes, ss_restore, ss_split)
from .cipher import decrypt, encrypt
from .signing import Signature, sign, signature_from_bytes, recover_pk, verify
from .vrf import vrf_eval, vrf_verify
from .onion import (Onion, onion_from_bytes, onion_peel, onion_to_bytes,
                    onion_wrap)

__all__ = [
    "keccak256",
    "KeyPair", "generate_keypair", "pk_to_address", "sk_to_pk",
    "DEFAULT_PRIME", "TEST_PRIME", "Share", "share_from_bytes",
    "share_to_bytes", "ss_restore", "ss_split",
    "decrypt", "encrypt",
    "Signature", "sign", "signature_from_bytes", "recover_pk", "verify",
    "vrf_eval", "vrf_verify",
    "Onion", "onion_from_bytes", "onion_peel", "onion_to_bytes", "onion_wrap",
]
