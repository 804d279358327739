import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
from sklearn.model_selection import train_test_split
from sklearn.linear_model import LogisticRegression
from sklearn.preprocessing import OneHotEncoder
from sklearn.preprocessing import StandardScaler
from sklearn.metrics import classification_report

df = pd.read_csv('/kaggle/input/churn.csv')

df.isnull().sum()
print(df.dtypes)
df.nunique()

dup = df.duplicated().sum()
print('duplicates:', dup)
df = df.drop_duplicates()

corr = df.corr(numeric_only=True)
print(corr['tenure'].sort_values())

def summarize(frame):
    return frame.describe().T

summary = summarize(df)
print(summary)

df.tail()
df.columns
print(len(df))

num_cols = [c for c in df.columns if df[c].dtype != 'object']
print(num_cols)

for col in df.columns:
    print(col, df[col].nunique())

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='tenure', data=df)
plt.xticks(rotation=45)
plt.show()

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

df = df.dropna(subset=['target'])
df['contract'] = df['contract'].fillna(df['contract'].mode()[0])
df['payment_method'] = df['payment_method'].fillna(df['payment_method'].mode()[0])
df['tenure'] = df['tenure'].fillna(df['tenure'].median())
df['monthly_charges'] = df['monthly_charges'].fillna(df['monthly_charges'].median())
df['total_charges'] = df['total_charges'].fillna(df['total_charges'].median())
df['target'] = df['target'].map({'yes': 1, 'no': 0})

X = df.drop('target', axis=1)
y = df['target']
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.2, random_state=69)
print(X_train.shape, X_test.shape)

prep0 = StandardScaler()
X_train = prep0.fit_transform(X_train)
X_test = prep0.transform(X_test)
prep1 = OneHotEncoder()
X_train = prep1.fit_transform(X_train)
X_test = prep1.transform(X_test)

model = LogisticRegression()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print(classification_report(y_test, preds))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
