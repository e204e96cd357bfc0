"""Published canonical forms of the two case-study configurations.

Conditions are text in the package's condition syntax; c1 writes the
inventory predicate as x1 so both listings share variables.
"""

C1_VERTICES = {
    "Start": "1",
    "OrderReceipt": "1",
    "InventoryCheck": "1",
    "Reject": "!x1 | !y",
    "End": "1",
    "CreditCheck": "x1",
    "Billing": "x1 & y",
    "Shipping": "x1 & y",
    "Archiving": "x1 & y",
    "Confirmation": "x1 & y",
}

C1_ARCS = {
    ("Start", "OrderReceipt"): "1",
    ("OrderReceipt", "InventoryCheck"): "1",
    ("InventoryCheck", "CreditCheck"): "x1",
    ("InventoryCheck", "Reject"): "!x1",
    ("CreditCheck", "Reject"): "x1 & !y",
    ("Reject", "End"): "!x1 | !y",
    ("CreditCheck", "Shipping"): "x1 & y",
    ("Shipping", "Billing"): "x1 & y",
    ("Billing", "Archiving"): "x1 & y",
    ("Archiving", "Confirmation"): "x1 & y",
    ("Confirmation", "End"): "x1 & y",
}

C2_VERTICES = {
    "Start": "1",
    "OrderReceipt": "1",
    "End": "1",
    "InventoryCheck": "1",
    "SupplierCheck": "!x1",
    "CreditCheck": "x1 | x2",
    "Reject": "!x1 & !x2 | !y",
    "Billing": "(x1 | x2) & y",
    "Shipping": "(x1 | x2) & y",
    "Archiving": "(x1 | x2) & y",
}

C2_ARCS = {
    ("Start", "OrderReceipt"): "1",
    ("OrderReceipt", "InventoryCheck"): "1",
    ("InventoryCheck", "SupplierCheck"): "!x1",
    ("InventoryCheck", "CreditCheck"): "x1",
    ("SupplierCheck", "CreditCheck"): "!x1 & x2",
    ("SupplierCheck", "Reject"): "!x1 & !x2",
    ("CreditCheck", "Reject"): "(x1 | x2) & !y",
    ("Reject", "End"): "!x1 & !x2 | !y",
    ("CreditCheck", "Billing"): "(x1 | x2) & y",
    ("CreditCheck", "Shipping"): "(x1 | x2) & y",
    ("Billing", "Archiving"): "(x1 | x2) & y",
    ("Shipping", "Archiving"): "(x1 | x2) & y",
    ("Archiving", "End"): "(x1 | x2) & y",
}

# runs of the two workflow configurations; AT1[0] is the full success run
AT1 = [
    ("OrderReceipt", "InventoryCheck", "CreditCheck", "Shipping", "Billing", "Archiving", "Confirmation", "TERMINATE"),
    ("OrderReceipt", "InventoryCheck", "Reject", "TERMINATE"),
    ("OrderReceipt", "InventoryCheck", "CreditCheck", "Reject", "TERMINATE"),
]

AT2 = [
    ("OrderReceipt", "InventoryCheck", "CreditCheck", "Billing", "Shipping", "Archiving", "TERMINATE"),
    ("OrderReceipt", "InventoryCheck", "CreditCheck", "Shipping", "Billing", "Archiving", "TERMINATE"),
    ("OrderReceipt", "InventoryCheck", "SupplierCheck", "Reject", "TERMINATE"),
    ("OrderReceipt", "InventoryCheck", "SupplierCheck", "CreditCheck", "Reject", "TERMINATE"),
    ("OrderReceipt", "InventoryCheck", "SupplierCheck", "CreditCheck", "Billing", "Shipping", "Archiving", "TERMINATE"),
    ("OrderReceipt", "InventoryCheck", "SupplierCheck", "CreditCheck", "Shipping", "Billing", "Archiving", "TERMINATE"),
    ("OrderReceipt", "InventoryCheck", "CreditCheck", "Reject", "TERMINATE"),
]
